use serde::{Deserialize, Serialize};

use super::{BinGrid, Rebin};
use crate::error::{invalid, Error, Result};
use crate::spin::{apply_pulse, DickeState, HamiltonianParams, PulseSpec, SpinOperators};
use crate::C64;

/// Measurement setting: tomography angle `alpha` and interferometer phase `theta`, radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Setting {
    pub alpha: f64,
    pub theta: f64,
}

impl Setting {
    pub fn new(alpha: f64, theta: f64) -> Self {
        Self { alpha, theta }
    }
}

/// Exact probabilities of binned imbalance outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    setting: Setting,
    grid: BinGrid,
    probs: Vec<f64>,
}

const SUM_TOL: f64 = 1e-9;

impl ProbabilityDistribution {
    /// Validates non-negativity and normalization, then renormalizes exactly.
    pub fn new(setting: Setting, grid: BinGrid, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != grid.len {
            return Err(Error::DimensionMismatch {
                expected: grid.len,
                got: probs.len(),
            });
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -1e-12 {
                return invalid(format!("probability {p} is negative or not finite"));
            }
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return invalid(format!("probabilities sum to {total}"));
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Ok(Self { setting, grid, probs })
    }

    pub(crate) fn from_parts_unchecked(setting: Setting, grid: BinGrid, probs: Vec<f64>) -> Self {
        Self { setting, grid, probs }
    }

    /// Jz populations of `state` on the native grid.
    pub fn from_populations(state: &DickeState, setting: Setting) -> Result<Self> {
        Self::new(setting, BinGrid::native(state.n_atoms()), state.populations())
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn n_atoms(&self) -> usize {
        self.grid.n_atoms
    }

    pub fn bin_width(&self) -> f64 {
        self.grid.width()
    }

    pub fn support(&self) -> Vec<f64> {
        self.grid.centers()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of bins with nonzero probability.
    pub fn occupied(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn mean_z(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| p * self.grid.center(k)).sum()
    }

    pub fn var_z(&self) -> f64 {
        let mean = self.mean_z();
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| p * (self.grid.center(k) - mean).powi(2))
            .sum()
    }

    /// Same distribution expressed on a larger aligned grid.
    pub fn on_grid(&self, outer: &BinGrid) -> Result<Self> {
        let u = self.grid.union(outer)?;
        if u != *outer {
            return Err(Error::BinningMismatch("target grid does not cover the distribution".into()));
        }
        let mut probs = vec![0.0; outer.len];
        let off = self.grid.offset_in(outer);
        probs[off..off + self.probs.len()].copy_from_slice(&self.probs);
        Ok(Self {
            setting: self.setting,
            grid: *outer,
            probs,
        })
    }
}

pub(crate) fn rebin_values(values: &[f64], ratio: usize) -> Vec<f64> {
    values.chunks(ratio).map(|c| c.iter().sum()).collect()
}

impl Rebin for ProbabilityDistribution {
    fn rebin(&self, new_width: f64) -> Result<Self> {
        let r = self.grid.ratio_for(new_width)?;
        Ok(Self {
            setting: self.setting,
            grid: self.grid.coarsened(r),
            probs: rebin_values(&self.probs, r),
        })
    }
}

/// Pulses that map a state onto the `Jz` readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    /// Tomography rotation; its angle is replaced by `alpha`.
    pub tomography: PulseSpec,
    /// Interferometer rotation; its angle is replaced by `theta`.
    pub readout: PulseSpec,
    /// Background `χ, δ` during finite pulses.
    pub background: HamiltonianParams,
}

impl Default for Readout {
    fn default() -> Self {
        let seq = crate::spin::SequencePulses::ideal();
        Self {
            tomography: seq.tomography,
            readout: seq.readout,
            background: HamiltonianParams {
                chi: 0.0,
                omega: 0.0,
                delta: 0.0,
            },
        }
    }
}

/// Rotated state `R_θ R_α |ψ⟩` whose populations give the outcome distribution.
pub fn outcome_family_point(
    state: &DickeState,
    ops: &SpinOperators,
    setting: Setting,
    readout: &Readout,
) -> Result<DickeState> {
    let tomo = PulseSpec {
        angle: setting.alpha,
        ..readout.tomography
    };
    let rot = PulseSpec {
        angle: setting.theta,
        ..readout.readout
    };
    let s = if setting.alpha != 0.0 {
        apply_pulse(state, &tomo, &readout.background, ops)?
    } else {
        state.clone()
    };
    if setting.theta != 0.0 {
        apply_pulse(&s, &rot, &readout.background, ops)
    } else {
        Ok(s)
    }
}

/// Born-rule distribution of `z = 2m/N` after the tomography and readout rotations.
pub fn outcome_distribution(
    state: &DickeState,
    ops: &SpinOperators,
    setting: Setting,
    readout: &Readout,
) -> Result<ProbabilityDistribution> {
    let rotated = outcome_family_point(state, ops, setting, readout)?;
    ProbabilityDistribution::from_populations(&rotated, setting)
}

/// `∂P_m/∂θ` for instantaneous rotations about the readout axis, exact.
pub fn distribution_derivative(rotated: &DickeState, ops: &SpinOperators, axis_phase: f64) -> Vec<f64> {
    let b = rotated.amplitudes();
    let jx = ops.apply_jx(b);
    let jy = ops.apply_jy(b);
    let (c, s) = (axis_phase.cos(), axis_phase.sin());
    b.iter()
        .zip(jx.iter().zip(&jy))
        .map(|(a, (x, y))| {
            let g: C64 = (x * c + y * s) * C64::new(0.0, -1.0);
            2.0 * (a.conj() * g).re
        })
        .collect()
}
