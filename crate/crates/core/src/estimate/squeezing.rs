use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::ProbabilityDistribution;

/// Number and spin squeezing factors, linear and in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingResult {
    pub xi2: f64,
    pub xi2_db: f64,
    pub xi2_number: f64,
    pub xi2_number_db: f64,
    pub visibility: f64,
    pub p: f64,
    /// Tomography angle of the minimum, when scanned.
    pub alpha: Option<f64>,
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `ξ_N² = Δz² N / 4p(1−p)` with `p = (⟨z⟩+1)/2`, and `ξ² = ξ_N²/𝒱²`.
pub fn squeezing_from_moments(mean_z: f64, var_z: f64, visibility: f64, n_atoms: usize) -> Result<SqueezingResult> {
    let p = (mean_z + 1.0) / 2.0;
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("population fraction p = {p} outside (0, 1)"));
    }
    if !(visibility > 0.0 && visibility <= 1.0 + 1e-12) {
        return invalid(format!("visibility {visibility} outside (0, 1]"));
    }
    if !(var_z >= 0.0) || n_atoms == 0 {
        return invalid("variance must be non-negative and n_atoms positive");
    }
    let xi2_number = var_z * n_atoms as f64 / (4.0 * p * (1.0 - p));
    let xi2 = xi2_number / (visibility * visibility);
    Ok(SqueezingResult {
        xi2,
        xi2_db: db(xi2),
        xi2_number,
        xi2_number_db: db(xi2_number),
        visibility,
        p,
        alpha: None,
    })
}

/// Minimum of `ξ²` over distributions recorded at different tomography angles.
pub fn spin_squeezing(per_alpha: &[ProbabilityDistribution], visibility: f64) -> Result<SqueezingResult> {
    let mut best: Option<SqueezingResult> = None;
    for d in per_alpha {
        let mut r = squeezing_from_moments(d.mean_z(), d.var_z(), visibility, d.n_atoms())?;
        r.alpha = Some(d.setting().alpha);
        if best.as_ref().is_none_or(|b| r.xi2 < b.xi2) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| crate::Error::InvalidArgument("no distributions given".into()))
}

/// `𝒱 = ⟨√(1−z²)⟩`, evaluated along the longest axis of the state.
pub fn visibility_from_distribution(dist: &ProbabilityDistribution) -> f64 {
    dist.probs()
        .iter()
        .zip(dist.support())
        .map(|(p, z)| p * (1.0 - z.clamp(-1.0, 1.0).powi(2)).sqrt())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{outcome_distribution, Readout, Setting};
    use crate::spin::{build_operators, coherent_state};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn coherent_state_is_unsqueezed() {
        let n = 200;
        let ops = build_operators(n).unwrap();
        let s = coherent_state(n, PI / 2.0, PI).unwrap();
        let dists: Vec<_> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&a| outcome_distribution(&s, &ops, Setting::new(a, 0.0), &Readout::default()).unwrap())
            .collect();
        let r = spin_squeezing(&dists, 1.0).unwrap();
        assert_abs_diff_eq!(r.xi2, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.xi2_db, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn db_and_visibility() {
        let r = squeezing_from_moments(0.0, 0.5 / 100.0, 0.5, 100).unwrap();
        assert_abs_diff_eq!(r.xi2_number, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.xi2, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.xi2_db, 10.0 * 2f64.log10(), epsilon = 1e-15);
        assert!(squeezing_from_moments(1.0, 0.1, 1.0, 10).is_err());
        assert!(squeezing_from_moments(0.0, 0.1, 0.0, 10).is_err());
    }

    #[test]
    fn visibility_of_polar_state_vanishes() {
        let ops = build_operators(10).unwrap();
        let s = coherent_state(10, 0.0, 0.0).unwrap();
        let d = outcome_distribution(&s, &ops, Setting::default(), &Readout::default()).unwrap();
        assert_abs_diff_eq!(visibility_from_distribution(&d), 0.0);
    }
}
