use serde::{Deserialize, Serialize};

use super::fisher::ThetaFamily;
use crate::error::{invalid, Error, Result};

/// Error-propagation sensitivity `Δθ = √Var z / |∂⟨z⟩/∂θ|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSensitivity {
    /// `None` when the fringe slope vanishes.
    pub delta_theta: Option<f64>,
    pub slope: f64,
    pub variance: f64,
    /// Standard quantum limit `1/√N`.
    pub sql: f64,
    pub beats_sql: bool,
}

fn build(slope: f64, variance: f64, n_atoms: usize) -> MomentSensitivity {
    let sql = 1.0 / (n_atoms as f64).sqrt();
    let delta_theta = (slope.abs() > 1e-14 * variance.sqrt().max(1e-300)).then(|| variance.sqrt() / slope.abs());
    MomentSensitivity {
        delta_theta,
        slope,
        variance,
        sql,
        beats_sql: delta_theta.is_some_and(|d| d < sql),
    }
}

/// Sensitivity at `thetas[index]` of a sampled fringe `⟨z⟩(θ)`, `Var z(θ)`.
pub fn moment_sensitivity(
    thetas: &[f64],
    means: &[f64],
    variances: &[f64],
    n_atoms: usize,
    index: usize,
) -> Result<MomentSensitivity> {
    if thetas.len() != means.len() || thetas.len() != variances.len() {
        return Err(Error::DimensionMismatch {
            expected: thetas.len(),
            got: means.len().min(variances.len()),
        });
    }
    if index == 0 || index + 1 >= thetas.len() {
        return invalid("slope needs neighbours on both sides");
    }
    let slope = (means[index + 1] - means[index - 1]) / (thetas[index + 1] - thetas[index - 1]);
    Ok(build(slope, variances[index], n_atoms))
}

/// Sensitivity of a distribution family at `theta_star`, slope by central difference with step `h`.
pub fn moment_sensitivity_of_family(family: &dyn ThetaFamily, theta_star: f64, h: f64) -> Result<MomentSensitivity> {
    if !(h > 0.0) {
        return invalid("difference step must be positive");
    }
    let centre = family.probabilities(theta_star)?;
    let up = family.probabilities(theta_star + h)?.mean_z();
    let down = family.probabilities(theta_star - h)?.mean_z();
    Ok(build((up - down) / (2.0 * h), centre.var_z(), centre.n_atoms()))
}
