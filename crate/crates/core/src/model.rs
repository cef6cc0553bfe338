//! Ideal-model figures of merit along an evolution-time scan.
//!
//! The ideal model starts from the coherent state on the unstable fixed point
//! (mean spin along −x) and evolves under constant `χ, Ω, δ`. During this
//! evolution a spin echo about −x commutes with the Hamiltonian when `δ = 0`,
//! so it is omitted.

use std::f64::consts::{FRAC_PI_2, PI};

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimate::{fisher_from_derivative, spin_squeezing, SqueezingResult};
use crate::measure::{convolve_with, gaussian_kernel, BinGrid, ProbabilityDistribution, Setting};
use crate::spin::{
    build_operators, coherent_state, evolve_constant, mean_spin, qfi, DickeState, HamiltonianParams, SpinOperators,
    Tridiagonal,
};
use crate::C64;

/// Constant-parameter model of `n_atoms` atoms.
#[derive(Debug, Clone)]
pub struct IdealModel {
    pub params: HamiltonianParams,
    ops: SpinOperators,
}

impl IdealModel {
    /// Model with `χ = ΛΩ/N`.
    pub fn new(n_atoms: usize, lambda: f64, omega: f64, delta: f64) -> Result<Self> {
        let params = HamiltonianParams::from_lambda(n_atoms, lambda, omega, delta)?;
        Ok(Self {
            params,
            ops: build_operators(n_atoms)?,
        })
    }

    /// `N = 430`, `Λ = 1.5`, `Ω = 2π·20 Hz`, `δ = 0`.
    pub fn reference() -> Self {
        Self::new(430, 1.5, 2.0 * PI * 20.0, 0.0).expect("reference parameters are valid")
    }

    pub fn ops(&self) -> &SpinOperators {
        &self.ops
    }

    pub fn n_atoms(&self) -> usize {
        self.ops.n_atoms()
    }

    pub fn initial_state(&self) -> DickeState {
        coherent_state(self.n_atoms(), FRAC_PI_2, PI).expect("valid polar angle")
    }

    /// State after evolving for `t` seconds.
    pub fn state_at(&self, t: f64) -> Result<DickeState> {
        let h = Tridiagonal::josephson(&self.ops, &self.params);
        evolve_constant(&self.initial_state(), &h, t)
    }
}

/// Readout setting maximizing the Fisher information of the `Jz` histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutOptimum {
    /// Tomography angle about x, in `[0, π)`.
    pub alpha: f64,
    /// Working point of the final rotation about y, in `[−π/2, π/2)`.
    pub theta0: f64,
    pub fisher: f64,
}

/// Evaluates `F(α, θ₀)` of a fixed state, caching the tomography rotations.
struct FisherSurface<'a> {
    ops: &'a SpinOperators,
    state: &'a DickeState,
    kernel: Vec<f64>,
}

impl<'a> FisherSurface<'a> {
    fn new(state: &'a DickeState, ops: &'a SpinOperators, noise_sigma: f64) -> Result<Self> {
        let kernel = gaussian_kernel(&BinGrid::native(state.n_atoms()), noise_sigma)?;
        Ok(Self { ops, state, kernel })
    }

    fn tomography(&self, alpha: f64) -> Vec<C64> {
        self.ops.rotate_x(self.state.amplitudes(), alpha)
    }

    fn fisher_after(&self, tomo: &[C64], theta0: f64) -> f64 {
        let b = self.ops.rotate_y(tomo, theta0);
        let jy = self.ops.apply_jy(&b);
        let mut p: Vec<f64> = b.iter().map(|a| a.norm_sqr()).collect();
        let mut d: Vec<f64> = b
            .iter()
            .zip(&jy)
            .map(|(a, g)| 2.0 * (a.conj() * g * C64::new(0.0, -1.0)).re)
            .collect();
        if self.kernel.len() > 1 {
            let grid = BinGrid::native(self.state.n_atoms());
            p = convolve_with(&grid, &p, &self.kernel).1;
            d = convolve_with(&grid, &d, &self.kernel).1;
        }
        fisher_from_derivative(&p, &d)
    }

    fn fisher(&self, alpha: f64, theta0: f64) -> f64 {
        self.fisher_after(&self.tomography(alpha), theta0)
    }
}

impl CostFunction for FisherSurface<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(-self.fisher(x[0], x[1]))
    }
}

fn wrap(alpha: f64, theta0: f64) -> (f64, f64) {
    // (α + π, θ₀) and (α, θ₀ + π) give the same Fisher information up to θ₀ → −θ₀
    let mut a = alpha.rem_euclid(2.0 * PI);
    let mut t = theta0;
    if a >= PI {
        a -= PI;
        t = -t;
    }
    t = (t + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    (a, t)
}

/// Maximizes the Fisher information over the tomography angle and the
/// readout working point: a coarse grid followed by Nelder–Mead refinement.
pub fn optimal_readout(state: &DickeState, ops: &SpinOperators, noise_sigma: f64) -> Result<ReadoutOptimum> {
    let surface = FisherSurface::new(state, ops, noise_sigma)?;
    let steps = 30;
    let step = PI / steps as f64;
    let mut coarse = Vec::with_capacity(steps * steps);
    for i in 0..steps {
        let alpha = i as f64 * step;
        let tomo = surface.tomography(alpha);
        for j in 0..steps {
            let theta0 = -FRAC_PI_2 + j as f64 * step;
            coarse.push((surface.fisher_after(&tomo, theta0), alpha, theta0));
        }
    }
    coarse.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = ReadoutOptimum {
        alpha: coarse[0].1,
        theta0: coarse[0].2,
        fisher: coarse[0].0,
    };
    for &(_, a, t) in coarse.iter().take(3) {
        let simplex = vec![vec![a, t], vec![a + step / 2.0, t], vec![a, t + step / 2.0]];
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-12)
            .map_err(|e| Error::RootNotFound(e.to_string()))?;
        let run = Executor::new(FisherSurface::new(state, ops, noise_sigma)?, solver)
            .configure(|s| s.max_iters(300))
            .run()
            .map_err(|e| Error::RootNotFound(e.to_string()))?;
        let st = run.state();
        if let Some(p) = st.best_param.as_ref() {
            if -st.best_cost > best.fisher {
                let (alpha, theta0) = wrap(p[0], p[1]);
                best = ReadoutOptimum {
                    alpha,
                    theta0,
                    fisher: -st.best_cost,
                };
            }
        }
    }
    Ok(best)
}

/// Distribution of `z` after the tomography rotation `alpha` alone.
fn tomography_distribution(state: &DickeState, ops: &SpinOperators, alpha: f64) -> Result<ProbabilityDistribution> {
    let b = ops.rotate_x(state.amplitudes(), alpha);
    ProbabilityDistribution::new(
        Setting::new(alpha, 0.0),
        BinGrid::native(state.n_atoms()),
        b.iter().map(|a| a.norm_sqr()).collect(),
    )
}

/// Normalized mean spin length `|⟨J⟩|/J`.
pub fn mean_spin_length(state: &DickeState, ops: &SpinOperators) -> f64 {
    let m = mean_spin(state, ops);
    (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt() / ops.spin_length()
}

/// Spin squeezing minimized over the tomography angle, with the visibility
/// taken as the normalized mean spin length.
pub fn optimal_squeezing(state: &DickeState, ops: &SpinOperators) -> Result<SqueezingResult> {
    let visibility = mean_spin_length(state, ops).min(1.0);
    let var = |a: f64| tomography_distribution(state, ops, a).map(|d| d.var_z());
    let steps = 90;
    let step = PI / steps as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..steps {
        let a = i as f64 * step;
        let v = var(a)?;
        if v < best.0 {
            best = (v, a);
        }
    }
    // golden-section refinement inside the bracketing grid cell pair
    let (mut lo, mut hi) = (best.1 - step, best.1 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (var(x1)?, var(x2)?);
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = var(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = var(x2)?;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let dists = [tomography_distribution(state, ops, alpha)?];
    spin_squeezing(&dists, visibility)
}

/// Figures of merit at one evolution time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub time: f64,
    pub qfi: f64,
    pub readout: ReadoutOptimum,
    pub squeezing: SqueezingResult,
    /// Optimized Fisher information after Gaussian detection noise, when requested.
    pub noisy_readout: Option<ReadoutOptimum>,
}

impl ScanPoint {
    pub fn inverse_xi2(&self) -> f64 {
        1.0 / self.squeezing.xi2
    }
}

impl IdealModel {
    /// Full figures of merit at time `t`; `noise_sigma > 0` adds a noisy Fisher optimum.
    pub fn scan_point(&self, t: f64, noise_sigma: f64) -> Result<ScanPoint> {
        let state = self.state_at(t)?;
        let noisy_readout = if noise_sigma > 0.0 {
            Some(optimal_readout(&state, &self.ops, noise_sigma)?)
        } else {
            None
        };
        Ok(ScanPoint {
            time: t,
            qfi: qfi(&state, &self.ops)?,
            readout: optimal_readout(&state, &self.ops, 0.0)?,
            squeezing: optimal_squeezing(&state, &self.ops)?,
            noisy_readout,
        })
    }

    /// `1/ξ²` optimized over the tomography angle at time `t`.
    pub fn inverse_xi2(&self, t: f64) -> Result<f64> {
        Ok(1.0 / optimal_squeezing(&self.state_at(t)?, &self.ops)?.xi2)
    }

    /// First time after `t_peak` at which `ξ²` returns to one, by bisection up to `t_max`.
    pub fn squeezing_crossing(&self, t_peak: f64, t_max: f64) -> Result<f64> {
        let f = |t: f64| self.inverse_xi2(t).map(|v| v - 1.0);
        let (mut lo, mut hi) = (t_peak, t_max);
        let (flo, fhi) = (f(lo)?, f(hi)?);
        if !(flo > 0.0 && fhi < 0.0) {
            return Err(Error::RootNotFound(format!(
                "squeezing does not cross one between {t_peak} s and {t_max} s"
            )));
        }
        while hi - lo > 1e-7 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Evenly spaced scan times `0, dt, …` with `count` points.
pub fn scan_times(count: usize, dt: f64) -> Result<Vec<f64>> {
    if count == 0 || !(dt > 0.0) {
        return invalid("scan needs a positive count and time step");
    }
    Ok((0..count).map(|k| k as f64 * dt).collect())
}
