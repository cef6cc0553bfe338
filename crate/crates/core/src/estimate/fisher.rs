use crate::error::{invalid, Error, Result};
use crate::measure::{
    convolve_noise, convolve_with, gaussian_kernel, outcome_distribution, outcome_family_point, ProbabilityDistribution,
    Readout, Rebin, Setting,
};
use crate::spin::{DickeState, PulseModel, SpinOperators};

/// A family of outcome distributions indexed by the phase `θ`.
pub trait ThetaFamily: Sync {
    fn probabilities(&self, theta: f64) -> Result<ProbabilityDistribution>;

    /// Exact `∂P/∂θ` on the grid of [`ThetaFamily::probabilities`], when available.
    fn derivative(&self, _theta: f64) -> Option<Result<Vec<f64>>> {
        None
    }
}

/// Family given by a closure, differentiated numerically.
pub struct FnFamily<F>(pub F);

impl<F> ThetaFamily for FnFamily<F>
where
    F: Fn(f64) -> Result<ProbabilityDistribution> + Sync,
{
    fn probabilities(&self, theta: f64) -> Result<ProbabilityDistribution> {
        (self.0)(theta)
    }
}

/// `θ ↦ P_z` of a fixed state read out after the tomography rotation `alpha`,
/// optionally with Gaussian noise (atoms) and rebinning.
#[derive(Debug, Clone)]
pub struct RotatedFamily<'a> {
    pub state: &'a DickeState,
    pub ops: &'a SpinOperators,
    pub alpha: f64,
    pub readout: Readout,
    pub noise_sigma: f64,
    pub bin_width: Option<f64>,
}

impl<'a> RotatedFamily<'a> {
    pub fn new(state: &'a DickeState, ops: &'a SpinOperators, alpha: f64) -> Self {
        Self {
            state,
            ops,
            alpha,
            readout: Readout::default(),
            noise_sigma: 0.0,
            bin_width: None,
        }
    }

    pub fn with_noise(mut self, sigma_atoms: f64) -> Self {
        self.noise_sigma = sigma_atoms;
        self
    }

    pub fn with_bin_width(mut self, width: f64) -> Self {
        self.bin_width = Some(width);
        self
    }
}

impl ThetaFamily for RotatedFamily<'_> {
    fn probabilities(&self, theta: f64) -> Result<ProbabilityDistribution> {
        let d = outcome_distribution(self.state, self.ops, Setting::new(self.alpha, theta), &self.readout)?;
        let d = convolve_noise(&d, self.noise_sigma)?;
        match self.bin_width {
            Some(w) => d.rebin(w),
            None => Ok(d),
        }
    }

    fn derivative(&self, theta: f64) -> Option<Result<Vec<f64>>> {
        if self.readout.readout.model != PulseModel::Instantaneous {
            return None;
        }
        let compute = || -> Result<Vec<f64>> {
            let rotated = outcome_family_point(self.state, self.ops, Setting::new(self.alpha, theta), &self.readout)?;
            let mut grid = crate::measure::BinGrid::native(self.state.n_atoms());
            let mut d =
                crate::measure::distribution_derivative(&rotated, self.ops, self.readout.readout.effective_phase());
            let kernel = gaussian_kernel(&grid, self.noise_sigma)?;
            if kernel.len() > 1 {
                let (g, v) = convolve_with(&grid, &d, &kernel);
                grid = g;
                d = v;
            }
            if let Some(w) = self.bin_width {
                let r = grid.ratio_for(w)?;
                d = d.chunks(r).map(|c| c.iter().sum()).collect();
            }
            Ok(d)
        };
        Some(compute())
    }
}

/// `Σ (∂P)² / P` over bins with `P > 0`.
pub fn fisher_from_derivative(probs: &[f64], dprobs: &[f64]) -> f64 {
    probs
        .iter()
        .zip(dprobs)
        .filter(|(p, _)| **p > 1e-300)
        .map(|(p, d)| d * d / p)
        .sum()
}

const CURVATURE_TOL: f64 = 0.1;

fn central(family: &dyn ThetaFamily, theta0: f64, h: f64) -> Result<Vec<f64>> {
    let p = family.probabilities(theta0 + h)?;
    let m = family.probabilities(theta0 - h)?;
    if p.grid() != m.grid() {
        return Err(Error::BinningMismatch("family grid changes with θ".into()));
    }
    Ok(p.probs().iter().zip(m.probs()).map(|(a, b)| (a - b) / (2.0 * h)).collect())
}

/// Classical Fisher information of `family` at `theta0`.
///
/// Uses the exact derivative when the family supplies one; otherwise central
/// differences with step `step` and `step/2` combined by Richardson
/// extrapolation, rejecting the result when the two orders disagree.
pub fn fisher_direct(family: &dyn ThetaFamily, theta0: f64, step: f64) -> Result<f64> {
    let p0 = family.probabilities(theta0)?;
    if let Some(d) = family.derivative(theta0) {
        return Ok(fisher_from_derivative(p0.probs(), &d?));
    }
    if !(step > 0.0) {
        return invalid("finite-difference step must be positive");
    }
    let coarse = central(family, theta0, step)?;
    let fine = central(family, theta0, step / 2.0)?;
    let rich: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
    let f_fine = fisher_from_derivative(p0.probs(), &fine);
    let f_rich = fisher_from_derivative(p0.probs(), &rich);
    check_curvature(f_fine, f_rich)?;
    Ok(f_rich)
}

fn check_curvature(lower: f64, higher: f64) -> Result<()> {
    let scale = higher.abs().max(1e-12);
    if (lower - higher).abs() / scale > CURVATURE_TOL {
        return Err(Error::GridTooCoarse(format!(
            "difference orders disagree ({lower:.4e} vs {higher:.4e})"
        )));
    }
    Ok(())
}

/// Fisher information at `thetas[index]` of a uniformly spaced family of distributions.
pub fn fisher_from_grid(thetas: &[f64], dists: &[ProbabilityDistribution], index: usize) -> Result<f64> {
    if thetas.len() != dists.len() {
        return Err(Error::DimensionMismatch {
            expected: thetas.len(),
            got: dists.len(),
        });
    }
    if index == 0 || index + 1 >= thetas.len() {
        return Err(Error::GridTooCoarse("central differences need neighbours on both sides".into()));
    }
    let h = thetas[index + 1] - thetas[index];
    if !(h > 0.0) || ((thetas[index] - thetas[index - 1]) - h).abs() > 1e-9 * h {
        return Err(Error::GridTooCoarse("θ grid must be uniform around the evaluation point".into()));
    }
    let grid = dists[index].grid();
    if dists.iter().any(|d| d.grid() != grid) {
        return Err(Error::BinningMismatch("family members use different grids".into()));
    }
    let diff = |a: usize, b: usize, span: f64| -> Vec<f64> {
        dists[a].probs().iter().zip(dists[b].probs()).map(|(x, y)| (x - y) / span).collect()
    };
    let p0 = dists[index].probs();
    let first = diff(index + 1, index - 1, 2.0 * h);
    let f_first = fisher_from_derivative(p0, &first);
    if index >= 2 && index + 2 < thetas.len() {
        let wide = diff(index + 2, index - 2, 4.0 * h);
        let rich: Vec<f64> = first.iter().zip(&wide).map(|(f, w)| (4.0 * f - w) / 3.0).collect();
        let f_rich = fisher_from_derivative(p0, &rich);
        check_curvature(f_first, f_rich)?;
        return Ok(f_rich);
    }
    Ok(f_first)
}

/// `Δθ_CR = 1/√(mF)`.
pub fn cramer_rao_bound(fisher: f64, m: usize) -> Result<f64> {
    if !(fisher > 0.0) || !fisher.is_finite() {
        return invalid("Fisher information must be positive");
    }
    if m == 0 {
        return invalid("number of measurements must be positive");
    }
    Ok(1.0 / (m as f64 * fisher).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::BinGrid;
    use crate::spin::{build_operators, coherent_state};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn coin(theta: f64) -> Result<ProbabilityDistribution> {
        let p = (theta / 2.0).cos().powi(2);
        ProbabilityDistribution::new(Setting::new(0.0, theta), BinGrid::native(1), vec![1.0 - p, p])
    }

    #[test]
    fn constant_family_has_no_information() {
        let fam = FnFamily(|t| ProbabilityDistribution::new(Setting::new(0.0, t), BinGrid::native(2), vec![0.2, 0.3, 0.5]));
        assert_abs_diff_eq!(fisher_direct(&fam, 0.3, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn coin_at_quadrature() {
        let f = fisher_direct(&FnFamily(coin), PI / 2.0, 1e-3).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn coarse_step_is_diagnosed() {
        assert!(matches!(
            fisher_direct(&FnFamily(coin), PI / 2.0, 2.5),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn coherent_state_rotated_about_y() {
        let n = 100;
        let ops = build_operators(n).unwrap();
        let s = coherent_state(n, PI / 2.0, PI).unwrap();
        let fam = RotatedFamily::new(&s, &ops, 0.0);
        let exact = fisher_direct(&fam, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(exact, 100.0, epsilon = 1e-8);
        let numeric = fisher_direct(&FnFamily(|t| fam.probabilities(t)), 0.0, 1e-3).unwrap();
        assert_abs_diff_eq!(numeric, 100.0, epsilon = 1e-5);
    }

    #[test]
    fn grid_family_matches_exact() {
        let n = 40;
        let ops = build_operators(n).unwrap();
        let s = coherent_state(n, 1.3, 2.9).unwrap();
        let fam = RotatedFamily::new(&s, &ops, 0.4).with_noise(3.0).with_bin_width(4.0 / n as f64);
        let thetas: Vec<f64> = (-2..=2).map(|k| 0.1 + k as f64 * 2e-3).collect();
        let dists: Vec<_> = thetas.iter().map(|&t| fam.probabilities(t).unwrap()).collect();
        let g = fisher_from_grid(&thetas, &dists, 2).unwrap();
        let e = fisher_direct(&fam, 0.1, 0.0).unwrap();
        assert!((g / e - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cramer_rao_scalings() {
        assert_abs_diff_eq!(cramer_rao_bound(100.0, 1).unwrap(), 0.1);
        assert_abs_diff_eq!(cramer_rao_bound(10_000.0, 1).unwrap(), 0.01);
        let r = cramer_rao_bound(50.0, 4).unwrap().powi(2) / cramer_rao_bound(50.0, 1).unwrap().powi(2);
        assert_abs_diff_eq!(r, 0.25, epsilon = 1e-15);
        assert!(cramer_rao_bound(0.0, 1).is_err());
    }
}
