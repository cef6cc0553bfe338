use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::{BinGrid, ProbabilityDistribution};

/// Flat-prior posterior summary on a discrete `θ` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesResult {
    pub m_sequence_length: usize,
    pub thetas: Vec<f64>,
    pub log_likelihood: Vec<f64>,
    /// Variance `−1/(2C)` of the quadratic fit `A + Bθ + Cθ²`, when concave.
    pub sigma2: Option<f64>,
    pub theta_center: Option<f64>,
    /// Outcomes outside the region where every reference is positive.
    pub discarded_count: usize,
    /// The quadratic fit opened downward.
    pub concave: bool,
    /// Retained imbalance range `[a, b]`.
    pub range: Option<[f64; 2]>,
}

/// Bins where every reference distribution is positive, on their common grid.
fn retained(family: &[ProbabilityDistribution]) -> Result<(BinGrid, Vec<Vec<f64>>, Vec<bool>)> {
    let mut grid = *family[0].grid();
    for d in &family[1..] {
        grid = grid.union(d.grid())?;
    }
    let probs: Vec<Vec<f64>> = family
        .iter()
        .map(|d| d.on_grid(&grid).map(|x| x.probs().to_vec()))
        .collect::<Result<_>>()?;
    let keep = (0..grid.len).map(|k| probs.iter().all(|p| p[k] > 0.0)).collect();
    Ok((grid, probs, keep))
}

/// Bayesian phase estimate from a sequence of imbalance outcomes `z_i`.
///
/// `thetas[j]` labels the reference distribution `family[j]`. Outcomes where
/// some reference vanishes are discarded without shortening the sequence.
pub fn bayesian_estimate(sequence: &[f64], thetas: &[f64], family: &[ProbabilityDistribution]) -> Result<BayesResult> {
    if thetas.len() != family.len() || family.is_empty() {
        return invalid("need one reference distribution per θ value");
    }
    let (grid, probs, keep) = retained(family)?;
    let lo = keep.iter().position(|&k| k);
    let hi = keep.iter().rposition(|&k| k);
    let range = lo.zip(hi).map(|(a, b)| [grid.center(a), grid.center(b)]);
    let mut loglik = vec![0.0; thetas.len()];
    let mut discarded = 0;
    for &z in sequence {
        match grid.bin_of_z(z).filter(|&k| keep[k]) {
            Some(k) => {
                for (l, p) in loglik.iter_mut().zip(&probs) {
                    *l += p[k].ln();
                }
            }
            None => discarded += 1,
        }
    }
    let mut result = BayesResult {
        m_sequence_length: sequence.len(),
        thetas: thetas.to_vec(),
        log_likelihood: loglik,
        sigma2: None,
        theta_center: None,
        discarded_count: discarded,
        concave: false,
        range,
    };
    if sequence.is_empty() {
        return Ok(result);
    }
    if discarded == sequence.len() {
        return Err(Error::EmptySequence);
    }
    let mut distinct = thetas.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return invalid("quadratic likelihood fit needs three distinct θ values");
    }
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (&t, &l) in thetas.iter().zip(&result.log_likelihood) {
        let row = Vector3::new(1.0, t, t * t);
        normal += row * row.transpose();
        rhs += row * l;
    }
    let coef = normal.cholesky().ok_or(Error::IndefiniteNormalEquations)?.solve(&rhs);
    let (b, c) = (coef[1], coef[2]);
    if c < 0.0 {
        result.concave = true;
        result.sigma2 = Some(-1.0 / (2.0 * c));
        result.theta_center = Some(-b / (2.0 * c));
    } else {
        log::warn!("log-likelihood fit is not concave (curvature {c:e})");
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{sample_draws, Setting};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn gaussian_shift(theta: f64) -> ProbabilityDistribution {
        let n = 60;
        let grid = BinGrid::native(n);
        let p: Vec<f64> = grid
            .centers()
            .iter()
            .map(|z| (-(z - theta).powi(2) / (2.0 * 0.01)).exp())
            .collect();
        let s: f64 = p.iter().sum();
        ProbabilityDistribution::new(Setting::new(0.0, theta), grid, p.into_iter().map(|x| x / s).collect()).unwrap()
    }

    #[test]
    fn empty_sequence_is_flat() {
        let thetas = [-0.1, 0.0, 0.1];
        let fam: Vec<_> = thetas.iter().map(|&t| gaussian_shift(t)).collect();
        let r = bayesian_estimate(&[], &thetas, &fam).unwrap();
        assert!(r.log_likelihood.iter().all(|&l| l == 0.0));
        assert!(r.sigma2.is_none());
    }

    #[test]
    fn quadratic_log_likelihood_is_recovered() {
        let thetas: Vec<f64> = (-3..=3).map(|k| k as f64 * 0.02).collect();
        let fam: Vec<_> = thetas.iter().map(|&t| gaussian_shift(t)).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let seq = sample_draws(&fam[3], 16, &mut rng).unwrap().z_values();
        let r = bayesian_estimate(&seq, &thetas, &fam).unwrap();
        // Gaussian shift families have log-likelihood curvature m/v
        assert!(r.concave);
        assert_abs_diff_eq!(r.sigma2.unwrap(), 0.01 / 16.0, epsilon = 1e-6);
        assert_eq!(r.discarded_count, 0);
    }

    #[test]
    fn discards_outside_common_support() {
        let grid = BinGrid::native(2);
        let a = ProbabilityDistribution::new(Setting::default(), grid, vec![0.5, 0.5, 0.0]).unwrap();
        let b = ProbabilityDistribution::new(Setting::default(), grid, vec![0.2, 0.3, 0.5]).unwrap();
        let c = ProbabilityDistribution::new(Setting::default(), grid, vec![0.1, 0.6, 0.3]).unwrap();
        let r = bayesian_estimate(&[1.0, -1.0], &[0.0, 0.1, 0.2], &[a.clone(), b.clone(), c.clone()]).unwrap();
        assert_eq!(r.discarded_count, 1);
        assert_eq!(r.m_sequence_length, 2);
        assert_eq!(r.range, Some([-1.0, 0.0]));
        assert!(matches!(
            bayesian_estimate(&[1.0], &[0.0, 0.1, 0.2], &[a, b, c]),
            Err(Error::EmptySequence)
        ));
    }
}
