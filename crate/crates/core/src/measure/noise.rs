use serde::{Deserialize, Serialize};

use super::{BinGrid, ProbabilityDistribution};
use crate::error::{invalid, Result};

/// Gaussian readout noise on the atom-number difference `N_b − N_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Detection noise in atoms.
    pub sigma_det: f64,
    /// Effective loss-induced noise in atoms.
    pub sigma_loss: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_det: 6.0,
            sigma_loss: 10.0,
        }
    }
}

/// Which noise contributions to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Det,
    Total,
}

impl NoiseModel {
    pub fn new(sigma_det: f64, sigma_loss: f64) -> Result<Self> {
        let m = Self { sigma_det, sigma_loss };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_det >= 0.0 && self.sigma_loss >= 0.0) || !self.sigma_total().is_finite() {
            return invalid("noise widths must be finite and non-negative");
        }
        Ok(())
    }

    /// `√(σ_det² + σ_loss²)`.
    pub fn sigma_total(&self) -> f64 {
        self.sigma_det.hypot(self.sigma_loss)
    }

    pub fn sigma(&self, which: NoiseKind) -> f64 {
        match which {
            NoiseKind::Det => self.sigma_det,
            NoiseKind::Total => self.sigma_total(),
        }
    }
}

/// Tail mass left outside the kernel support.
const TAIL: f64 = 1e-9;

/// Normalized discrete Gaussian for noise `sigma_atoms` on `grid`, indexed `−K..=K`.
pub fn gaussian_kernel(grid: &BinGrid, sigma_atoms: f64) -> Result<Vec<f64>> {
    if !(sigma_atoms >= 0.0) || !sigma_atoms.is_finite() {
        return invalid(format!("noise width {sigma_atoms} must be finite and non-negative"));
    }
    // the atom-number difference spans 2 per native bin
    let sigma_bins = sigma_atoms / (2.0 * grid.factor as f64);
    if sigma_bins == 0.0 {
        return Ok(vec![1.0]);
    }
    let mut half = 1usize;
    loop {
        let kernel: Vec<f64> = (-(half as i64)..=half as i64)
            .map(|j| (-0.5 * (j as f64 / sigma_bins).powi(2)).exp())
            .collect();
        let total: f64 = kernel.iter().sum();
        let edge = kernel[0] / total;
        // geometric bound on the discarded tail beyond ±half
        let ratio = (-(2.0 * half as f64 + 1.0) / (2.0 * sigma_bins * sigma_bins)).exp();
        if 2.0 * edge * ratio / (1.0 - ratio).max(1e-300) < TAIL {
            return Ok(kernel.into_iter().map(|k| k / total).collect());
        }
        half += 1;
    }
}

/// Convolves `values` on `grid` with `kernel`, widening the grid by the kernel half-width.
pub fn convolve_with(grid: &BinGrid, values: &[f64], kernel: &[f64]) -> (BinGrid, Vec<f64>) {
    let half = kernel.len() / 2;
    let out_grid = BinGrid {
        first: grid.first - (half * grid.factor) as i64,
        len: grid.len + 2 * half,
        ..*grid
    };
    let mut out = vec![0.0; out_grid.len];
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for (j, &k) in kernel.iter().enumerate() {
            out[i + j] += v * k;
        }
    }
    (out_grid, out)
}

/// Gaussian convolution with `sigma_atoms` of noise on `N_b − N_a`.
pub fn convolve_noise(dist: &ProbabilityDistribution, sigma_atoms: f64) -> Result<ProbabilityDistribution> {
    let kernel = gaussian_kernel(dist.grid(), sigma_atoms)?;
    if kernel.len() == 1 {
        return Ok(dist.clone());
    }
    let (grid, probs) = convolve_with(dist.grid(), dist.probs(), &kernel);
    ProbabilityDistribution::new(dist.setting(), grid, probs)
}

impl NoiseModel {
    pub fn apply(&self, dist: &ProbabilityDistribution, which: NoiseKind) -> Result<ProbabilityDistribution> {
        self.validate()?;
        convolve_noise(dist, self.sigma(which))
    }
}
