use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::DensityMatrixSym;
use crate::error::{invalid, Error, Result};
use crate::measure::{gaussian_kernel, BinGrid, EmpiricalDistribution, ProbabilityDistribution, Setting};
use crate::spin::{build_operators, DickeState, SpinOperators};
use crate::C64;

/// Relative slack allowed on the per-step likelihood change.
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once the relative log-likelihood gain falls below this.
    pub tolerance: f64,
    /// Detection noise in atoms folded into the projectors; zero means plain projectors.
    pub noise_sigma: f64,
    /// Try a pure-state refinement of the leading eigenvector after the mixed iteration.
    pub rank_one_polish: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-10,
            noise_sigma: 0.0,
            rank_one_polish: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub rho: DensityMatrixSym,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every accepted mixed-state step, starting from the initial state.
    pub trace: Vec<f64>,
    /// Fewer independent data than density-matrix parameters.
    pub underdetermined: bool,
    /// Whether the pure-state refinement replaced the mixed estimate.
    pub polished: bool,
}

/// `count` settings with the tomography angle stepped by 10° and the readout angle by 5°.
pub fn ramp_settings(count: usize) -> Vec<Setting> {
    (0..count)
        .map(|k| Setting::new((10.0 * k as f64).to_radians(), (5.0 * k as f64).to_radians()))
        .collect()
}

struct Block {
    /// Measurement unitary `R_y(θ) R_x(α)`.
    u: DMatrix<C64>,
    /// Observed weights on the noise-widened outcome grid.
    freqs: Vec<f64>,
}

struct Problem {
    n_atoms: usize,
    blocks: Vec<Block>,
    kernel: Vec<f64>,
}

fn measurement_unitary(ops: &SpinOperators, s: Setting) -> DMatrix<C64> {
    let d = ops.dim();
    let mut u = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[j] = C64::new(1.0, 0.0);
        let col = ops.rotate_y(&ops.rotate_x(&e, s.alpha), s.theta);
        u.set_column(j, &DVector::from_vec(col));
    }
    u
}

impl Problem {
    fn build(n_atoms: usize, data: &[(Setting, BinGrid, Vec<f64>)], noise_sigma: f64) -> Result<Self> {
        if data.is_empty() {
            return invalid("tomography needs at least one histogram");
        }
        let ops = build_operators(n_atoms)?;
        let native = BinGrid::native(n_atoms);
        let kernel = gaussian_kernel(&native, noise_sigma)?;
        let half = (kernel.len() / 2) as i64;
        let outcome = BinGrid {
            first: -half,
            len: native.len + 2 * half as usize,
            ..native
        };
        let total: f64 = data.iter().flat_map(|(_, _, w)| w.iter()).sum();
        if !(total > 0.0) {
            return Err(Error::ZeroWeights);
        }
        let blocks = data
            .iter()
            .map(|(setting, grid, w)| {
                if grid.n_atoms != n_atoms || grid.factor != 1 {
                    return Err(Error::BinningMismatch(format!(
                        "tomography histograms need width 2/N on N={n_atoms}, got {grid:?}"
                    )));
                }
                let mut freqs = vec![0.0; outcome.len];
                for (k, &x) in w.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let idx = grid.native_start(k);
                    let slot = outcome
                        .bin_of_native(idx)
                        .ok_or_else(|| Error::BinningMismatch(format!("outcome at native index {idx} is impossible")))?;
                    freqs[slot] += x / total;
                }
                Ok(Block {
                    u: measurement_unitary(&ops, *setting),
                    freqs,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_atoms, blocks, kernel })
    }

    fn outcome_probs(&self, block: &Block, rho: &DMatrix<C64>) -> Vec<f64> {
        let w = &block.u * rho;
        let d = rho.nrows();
        let native: Vec<f64> = (0..d)
            .map(|m| (0..d).map(|j| (w[(m, j)] * block.u[(m, j)].conj()).re).sum::<f64>().max(0.0))
            .collect();
        let mut out = vec![0.0; block.freqs.len()];
        for (i, &p) in native.iter().enumerate() {
            for (j, &k) in self.kernel.iter().enumerate() {
                out[i + j] += p * k;
            }
        }
        out
    }

    /// Log-likelihood and the operator `R(ρ)`.
    fn evaluate(&self, rho: &DMatrix<C64>) -> (f64, DMatrix<C64>) {
        let d = rho.nrows();
        self.blocks
            .par_iter()
            .map(|b| {
                let p = self.outcome_probs(b, rho);
                let mut ll = 0.0;
                let ratio: Vec<f64> = b
                    .freqs
                    .iter()
                    .zip(&p)
                    .map(|(&f, &q)| {
                        if f == 0.0 {
                            0.0
                        } else {
                            let q = q.max(1e-300);
                            ll += f * q.ln();
                            f / q
                        }
                    })
                    .collect();
                let r_native: Vec<f64> = (0..d)
                    .map(|i| self.kernel.iter().enumerate().map(|(j, &k)| k * ratio[i + j]).sum())
                    .collect();
                let mut scaled = b.u.clone();
                for (mut row, &r) in scaled.row_iter_mut().zip(&r_native) {
                    row *= C64::new(r, 0.0);
                }
                (ll, b.u.adjoint() * scaled)
            })
            .reduce(|| (0.0, DMatrix::zeros(d, d)), |a, b| (a.0 + b.0, a.1 + b.1))
    }

    fn log_likelihood(&self, rho: &DMatrix<C64>) -> f64 {
        self.evaluate(rho).0
    }
}

fn normalized_sandwich(r: &DMatrix<C64>, rho: &DMatrix<C64>, eps: Option<f64>) -> DMatrix<C64> {
    let d = rho.nrows();
    let a = match eps {
        None => r.clone(),
        Some(e) => DMatrix::identity(d, d) + r * C64::new(e, 0.0),
    };
    let mut next = &a * rho * a.adjoint();
    next = (&next + next.adjoint()) * C64::new(0.5, 0.0);
    let tr = next.trace().re;
    next / C64::new(tr, 0.0)
}

/// Largest dilution parameter tried before the undiluted step is abandoned.
const DILUTIONS: [f64; 12] = [1.0, 0.3, 0.1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 1e-6];

fn relative_gain(new: f64, old: f64) -> f64 {
    (new - old) / old.abs().max(1e-300)
}

fn run(problem: &Problem, options: &MleOptions) -> Result<MleResult> {
    if options.max_iterations == 0 || !(options.tolerance >= 0.0) {
        return invalid("iteration limit must be positive and tolerance non-negative");
    }
    let n = problem.n_atoms;
    let mut rho = DensityMatrixSym::maximally_mixed(n).matrix().clone();
    let (mut ll, mut r) = problem.evaluate(&rho);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let mut accepted = None;
        for eps in std::iter::once(None).chain(DILUTIONS.iter().copied().map(Some)) {
            let cand = normalized_sandwich(&r, &rho, eps);
            let (cll, cr) = problem.evaluate(&cand);
            if cll >= ll {
                accepted = Some((cand, cll, cr));
                break;
            }
        }
        let Some((cand, cll, cr)) = accepted else {
            // no direction improves: stationary up to rounding, or a genuine stall
            let cand = normalized_sandwich(&r, &rho, Some(*DILUTIONS.last().unwrap()));
            let cll = problem.log_likelihood(&cand);
            if relative_gain(cll, ll) < -SLACK {
                trace.push(cll);
                return Err(Error::LikelihoodStall { iteration: iterations, trace });
            }
            converged = true;
            break;
        };
        let gain = relative_gain(cll, ll);
        rho = cand;
        ll = cll;
        r = cr;
        trace.push(ll);
        if gain < options.tolerance {
            converged = true;
            break;
        }
    }

    let mut polished = false;
    if options.rank_one_polish {
        let mixed = DensityMatrixSym::from_unchecked(n, rho.clone());
        if let Ok((psi, pll)) = polish(problem, mixed.leading_state()?, options) {
            if pll >= ll {
                rho = DensityMatrixSym::pure(&psi).matrix().clone();
                ll = pll;
                polished = true;
            }
        }
    }

    let distinct: std::collections::BTreeSet<(u64, u64)> = problem
        .blocks
        .iter()
        .map(|b| {
            let ph = b.u.iter().map(|c| c.re.to_bits() ^ c.im.to_bits()).fold(0u64, |a, x| a.rotate_left(7) ^ x);
            (ph, b.u.nrows() as u64)
        })
        .collect();
    let params = (n + 1) * (n + 1) - 1;
    let underdetermined = distinct.len() * n < params || distinct.len() < 2;

    Ok(MleResult {
        rho: DensityMatrixSym::from_unchecked(n, rho),
        log_likelihood: ll,
        iterations,
        converged,
        trace,
        underdetermined,
        polished,
    })
}

/// Pure-state fixed-point iteration `ψ ← R(ψψ†)ψ`, diluted when the likelihood would drop.
fn polish(problem: &Problem, start: DickeState, options: &MleOptions) -> Result<(DickeState, f64)> {
    let n = problem.n_atoms;
    let to_vec = |s: &DickeState| DVector::from_column_slice(s.amplitudes());
    let mut psi = to_vec(&start);
    let proj = |v: &DVector<C64>| v * v.adjoint();
    let (mut ll, mut r) = problem.evaluate(&proj(&psi));
    for _ in 0..options.max_iterations {
        let mut accepted = None;
        for eps in std::iter::once(None).chain(DILUTIONS.iter().copied().map(Some)) {
            let mut cand = match eps {
                None => &r * &psi,
                Some(e) => &psi + &r * &psi * C64::new(e, 0.0),
            };
            let norm = cand.norm();
            cand /= C64::new(norm, 0.0);
            let (cll, cr) = problem.evaluate(&proj(&cand));
            if cll >= ll {
                accepted = Some((cand, cll, cr));
                break;
            }
        }
        let Some((cand, cll, cr)) = accepted else { break };
        let gain = relative_gain(cll, ll);
        psi = cand;
        ll = cll;
        r = cr;
        if gain < options.tolerance {
            break;
        }
    }
    Ok((DickeState::normalized(n, psi.iter().copied().collect())?, ll))
}

/// Maximum-likelihood density matrix from sampled histograms, one per measurement setting.
pub fn mle_reconstruct(histograms: &[EmpiricalDistribution], n_atoms: usize, options: &MleOptions) -> Result<MleResult> {
    let data: Vec<_> = histograms
        .iter()
        .map(|h| (h.setting(), *h.grid(), h.counts().iter().map(|&c| c as f64).collect()))
        .collect();
    run(&Problem::build(n_atoms, &data, options.noise_sigma)?, options)
}

/// As [`mle_reconstruct`], with exact outcome frequencies in place of counts.
pub fn mle_from_frequencies(
    distributions: &[ProbabilityDistribution],
    n_atoms: usize,
    options: &MleOptions,
) -> Result<MleResult> {
    let data: Vec<_> = distributions
        .iter()
        .map(|d| (d.setting(), *d.grid(), d.probs().to_vec()))
        .collect();
    run(&Problem::build(n_atoms, &data, options.noise_sigma)?, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{convolve_noise, outcome_distribution, sample, Readout};
    use crate::spin::{coherent_state, evolve_constant, HamiltonianParams, Tridiagonal};

    fn squeezed(n: usize) -> (DickeState, SpinOperators) {
        let ops = build_operators(n).unwrap();
        let css = coherent_state(n, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        let h = Tridiagonal::josephson(&ops, &HamiltonianParams::new(1.0, 0.0, 0.0).unwrap());
        (evolve_constant(&css, &h, 0.15).unwrap(), ops)
    }

    fn distributions(state: &DickeState, ops: &SpinOperators, settings: &[Setting]) -> Vec<ProbabilityDistribution> {
        settings
            .iter()
            .map(|&s| outcome_distribution(state, ops, s, &Readout::default()).unwrap())
            .collect()
    }

    #[test]
    fn exact_frequencies_recover_pure_state() {
        let (psi, ops) = squeezed(12);
        let dists = distributions(&psi, &ops, &ramp_settings(14));
        let res = mle_from_frequencies(&dists, 12, &MleOptions::default()).unwrap();
        assert!(res.rho.fidelity_with(&psi) > 1.0 - 1e-6, "{}", res.rho.fidelity_with(&psi));
        assert!(res.trace.windows(2).all(|w| w[1] >= w[0] - SLACK * w[0].abs()));
    }

    #[test]
    fn top_state_from_samples() {
        let n = 10;
        let ops = build_operators(n).unwrap();
        let top = DickeState::basis(n, n).unwrap();
        let hists: Vec<_> = distributions(&top, &ops, &ramp_settings(19))
            .iter()
            .enumerate()
            .map(|(i, d)| sample(d, 500, i as u64).unwrap())
            .collect();
        let res = mle_reconstruct(&hists, n, &MleOptions::default()).unwrap();
        assert!(res.rho.fidelity_with(&top) >= 0.99, "{}", res.rho.fidelity_with(&top));
        let ev = res.rho.eigenvalues();
        assert!(ev[0] > -1e-10);
        assert!((res.rho.matrix().trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_setting_matches_marginal() {
        let (psi, ops) = squeezed(6);
        let d = distributions(&psi, &ops, &[Setting::new(0.0, 0.0)]);
        let opts = MleOptions {
            tolerance: 1e-15,
            ..MleOptions::default()
        };
        let res = mle_from_frequencies(&d, 6, &opts).unwrap();
        assert!(res.underdetermined);
        assert!(!res.polished);
        for (k, p) in d[0].probs().iter().enumerate() {
            assert!((res.rho.matrix()[(k, k)].re - p).abs() < 1e-8);
        }
    }

    #[test]
    fn noisy_projectors() {
        let (psi, ops) = squeezed(8);
        let dists: Vec<_> = distributions(&psi, &ops, &ramp_settings(14))
            .iter()
            .map(|d| convolve_noise(d, 1.5).unwrap())
            .collect();
        let opts = MleOptions {
            noise_sigma: 1.5,
            ..MleOptions::default()
        };
        let res = mle_from_frequencies(&dists, 8, &opts).unwrap();
        assert!(res.rho.fidelity_with(&psi) > 0.999, "{}", res.rho.fidelity_with(&psi));
    }

    #[test]
    fn rejects_coarse_bins() {
        let ops = build_operators(4).unwrap();
        let d = outcome_distribution(&DickeState::basis(4, 0).unwrap(), &ops, Setting::new(0.0, 0.0), &Readout::default())
            .unwrap();
        use crate::measure::Rebin;
        let coarse = d.rebin(1.0).unwrap();
        assert!(matches!(
            mle_from_frequencies(&[coarse], 4, &MleOptions::default()),
            Err(Error::BinningMismatch(_))
        ));
    }
}
