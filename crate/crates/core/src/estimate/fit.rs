use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::jackknife::{jackknife_hellinger, JackknifeConfig, JackknifeResult};
use crate::error::{invalid, Error, Result};
use crate::measure::Draws;

/// One measured squared Hellinger distance with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub theta: f64,
    pub d2: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Include the `F′θ³/16` term.
    pub cubic: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { cubic: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    Exact,
    HellingerFit,
}

/// Weighted least-squares diagnostics of the curvature fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    /// `[c, F, F′]` (or `[c, F]` without the cubic term).
    pub coefficients: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub offset: f64,
    pub chi2: f64,
    pub dof: usize,
    /// Raw curvature was negative and `F` was projected to zero.
    pub clipped: bool,
}

/// Fisher information with uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherEstimate {
    pub fisher: f64,
    pub fisher_prime: Option<f64>,
    pub fisher_per_atom: f64,
    pub std_error: f64,
    pub ci68: [f64; 2],
    /// `F/N > 1`: the state is not separable.
    pub entangled: bool,
    pub method: FitMethod,
    pub fit: Option<FitSummary>,
}

impl FisherEstimate {
    /// Estimate known exactly, e.g. from [`super::fisher_direct`].
    pub fn exact(fisher: f64, n_atoms: usize) -> Self {
        let per = fisher / n_atoms as f64;
        Self {
            fisher,
            fisher_prime: None,
            fisher_per_atom: per,
            std_error: 0.0,
            ci68: [fisher, fisher],
            entangled: per > 1.0,
            method: FitMethod::Exact,
            fit: None,
        }
    }
}

/// Fits `d² = c + (F/8)θ² [+ (F′/16)θ³]` by weighted least squares.
pub fn fit_fisher(points: &[FitPoint], n_atoms: usize, options: &FitOptions) -> Result<FisherEstimate> {
    let p = if options.cubic { 3 } else { 2 };
    if n_atoms == 0 {
        return invalid("n_atoms must be at least 1");
    }
    let mut thetas: Vec<f64> = points.iter().map(|q| q.theta).collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    if thetas.len() < p + 1 {
        return invalid(format!("need at least {} distinct θ values", p + 1));
    }
    if points.iter().any(|q| !(q.sigma > 0.0) || !q.d2.is_finite() || !q.theta.is_finite()) {
        return invalid("fit points need finite values and positive uncertainties");
    }
    let weights: Vec<f64> = points.iter().map(|q| 1.0 / (q.sigma * q.sigma)).collect();
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::ZeroWeights);
    }
    let design = DMatrix::from_fn(points.len(), p, |i, j| {
        let t = points[i].theta;
        match j {
            0 => 1.0,
            1 => t * t / 8.0,
            _ => t * t * t / 16.0,
        }
    });
    let w = DVector::from_vec(weights);
    let y = DVector::from_iterator(points.len(), points.iter().map(|q| q.d2));
    let weighted = DMatrix::from_fn(points.len(), p, |i, j| design[(i, j)] * w[i]);
    let normal = design.transpose() * &weighted;
    let rhs = weighted.transpose() * &y;
    let chol = normal.cholesky().ok_or(Error::IndefiniteNormalEquations)?;
    let coef = chol.solve(&rhs);
    let cov = chol.inverse();
    let resid = &y - &design * &coef;
    let chi2: f64 = resid.iter().zip(w.iter()).map(|(r, w)| w * r * r).sum();
    let raw = coef[1];
    let std_error = cov[(1, 1)].max(0.0).sqrt();
    let clipped = raw < 0.0;
    let fisher = raw.max(0.0);
    let per = fisher / n_atoms as f64;
    Ok(FisherEstimate {
        fisher,
        fisher_prime: options.cubic.then(|| coef[2]),
        fisher_per_atom: per,
        std_error,
        ci68: [(fisher - std_error).max(0.0), fisher + std_error],
        entangled: per > 1.0,
        method: FitMethod::HellingerFit,
        fit: Some(FitSummary {
            coefficients: coef.iter().copied().collect(),
            covariance: (0..p).map(|i| (0..p).map(|j| cov[(i, j)]).collect()).collect(),
            offset: coef[0],
            chi2,
            dof: points.len() - p,
            clipped,
        }),
    })
}

/// Hellinger-curvature analysis of sampled data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HellingerAnalysis {
    pub estimate: FisherEstimate,
    pub points: Vec<FitPoint>,
    pub jackknife: Vec<JackknifeResult>,
    /// Predicted raw offset `(n−1)(1/M₀ + 1/M₁)/8` for the reference binning.
    pub c0_predicted: f64,
}

/// Jackknifed `d²_H(f₀, f_θ)` for each sample against the `θ = 0` reference,
/// plus the distance between the two halves of the reference at `θ = 0`,
/// fitted with [`fit_fisher`].
pub fn hellinger_fisher(
    reference: &Draws,
    others: &[Draws],
    n_atoms: usize,
    jackknife: &JackknifeConfig,
    options: &FitOptions,
) -> Result<HellingerAnalysis> {
    if reference.len() < 4 {
        return invalid("reference sample is too small");
    }
    let (half_a, half_b) = reference.split_at(reference.len() / 2);
    let mut results = vec![jackknife_hellinger(&half_a, &half_b, jackknife)?];
    let mut points = vec![(reference.setting.theta, 0usize)];
    for (i, s) in others.iter().enumerate() {
        results.push(jackknife_hellinger(reference, s, jackknife)?);
        points.push((s.setting.theta, i + 1));
    }
    let positive = results
        .iter()
        .map(|r| r.std_error)
        .filter(|&s| s > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if positive.is_finite() { positive } else { 1e-12 };
    let mut fit_points: Vec<FitPoint> = points
        .iter()
        .map(|&(theta, k)| FitPoint {
            theta: theta - reference.setting.theta,
            d2: results[k].estimate,
            sigma: results[k].std_error.max(floor),
        })
        .collect();
    fit_points.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let estimate = fit_fisher(&fit_points, n_atoms, options)?;
    let occupied = reference.histogram().counts().iter().filter(|&&c| c > 0).count();
    let m1 = if others.is_empty() {
        half_b.len()
    } else {
        others.iter().map(Draws::len).sum::<usize>() / others.len()
    };
    let c0 = (occupied as f64 - 1.0).max(0.0) * (1.0 / reference.len() as f64 + 1.0 / m1 as f64) / 8.0;
    Ok(HellingerAnalysis {
        estimate,
        points: fit_points,
        jackknife: results,
        c0_predicted: c0,
    })
}
