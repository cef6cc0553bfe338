//! Declarative run configuration. Angles are in degrees and frequencies in Hz.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimate::{FitOptions, JackknifeConfig};
use crate::measure::NoiseModel;
use crate::spin::{LossModel, PulseModel, PulseSpec, SequencePulses};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<ExperimentConfig>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    pub phasespace: Option<PhaseSpaceConfig>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_atoms: usize,
    pub dynamics: Dynamics,
    pub times_ms: Vec<f64>,
    #[serde(default = "default_alphas")]
    pub alpha_deg: Vec<f64>,
    #[serde(default = "default_thetas")]
    pub theta_deg: Vec<f64>,
    /// Gaussian noise on `N_b − N_a`, in atoms.
    #[serde(default = "no_noise")]
    pub noise: NoiseModel,
}

fn default_alphas() -> Vec<f64> {
    vec![0.0]
}

/// Readout angles of the reference analysis, in degrees.
pub fn default_thetas() -> Vec<f64> {
    vec![-2.5, -1.5, -0.5, 0.0, 0.5, 1.5, 2.5, 3.5]
}

fn no_noise() -> NoiseModel {
    NoiseModel {
        sigma_det: 0.0,
        sigma_loss: 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Dynamics {
    /// Constant `Λ`, `Ω`, `δ` from the coherent state on the unstable point, instantaneous readout.
    Ideal {
        lambda: f64,
        omega_hz: f64,
        #[serde(default)]
        delta_hz: f64,
    },
    /// Full pulse program with atom loss.
    Sequence {
        omega_hz: f64,
        #[serde(default)]
        loss: LossModel,
        #[serde(default)]
        pulses: PulsesConfig,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub axis_phase_deg: f64,
    pub angle_deg: f64,
    pub rabi_hz: f64,
    #[serde(default)]
    pub phase_offset_deg: f64,
    #[serde(default)]
    pub model: PulseModel,
}

impl From<PulseSpec> for PulseConfig {
    fn from(p: PulseSpec) -> Self {
        Self {
            axis_phase_deg: p.axis_phase.to_degrees(),
            angle_deg: p.angle.to_degrees(),
            rabi_hz: p.rabi_frequency / (2.0 * PI),
            phase_offset_deg: p.phase_offset.to_degrees(),
            model: p.model,
        }
    }
}

impl PulseConfig {
    fn to_spec(self) -> Result<PulseSpec> {
        if !(self.rabi_hz > 0.0) || !self.rabi_hz.is_finite() {
            return invalid(format!("pulse Rabi frequency {} Hz must be positive", self.rabi_hz));
        }
        Ok(PulseSpec {
            axis_phase: self.axis_phase_deg.to_radians(),
            angle: self.angle_deg.to_radians(),
            rabi_frequency: 2.0 * PI * self.rabi_hz,
            phase_offset: self.phase_offset_deg.to_radians(),
            model: self.model,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulsesConfig {
    pub preparation: PulseConfig,
    pub echo: PulseConfig,
    pub tomography: PulseConfig,
    pub readout: PulseConfig,
}

impl Default for PulsesConfig {
    fn default() -> Self {
        let p = SequencePulses::default();
        Self {
            preparation: p.preparation.into(),
            echo: p.echo.into(),
            tomography: p.tomography.into(),
            readout: p.readout.into(),
        }
    }
}

impl PulsesConfig {
    pub fn to_pulses(self) -> Result<SequencePulses> {
        Ok(SequencePulses {
            preparation: self.preparation.to_spec()?,
            echo: self.echo.to_spec()?,
            tomography: self.tomography.to_spec()?,
            readout: self.readout.to_spec()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    /// Draws per setting away from `θ = 0`.
    pub draws: usize,
    /// Draws at `θ = 0`.
    pub reference_draws: usize,
    pub seed: u64,
    /// Also write exact probabilities.
    pub exact: bool,
    /// Also write the raw outcomes in draw order.
    pub write_draws: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            draws: 500,
            reference_draws: 2000,
            seed: 0,
            exact: false,
            write_draws: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Histogram bin width in `z`; defaults to `4/N`.
    pub bin_width: Option<f64>,
    /// Tomography angle of the Fisher analysis; defaults to the one with most readout angles.
    pub alpha_deg: Option<f64>,
    /// Largest `|θ|` in degrees entering the Hellinger fit.
    pub fit_range_deg: f64,
    pub jackknife: JackknifeConfig,
    pub fit: FitOptions,
    pub bayes: BayesConfig,
    /// Contrast used for `ξ²`; taken from a `θ = ±90°` histogram when absent.
    pub visibility: Option<f64>,
    pub tomography: TomographyConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bin_width: None,
            alpha_deg: None,
            fit_range_deg: 10.0,
            jackknife: JackknifeConfig::default(),
            fit: FitOptions::default(),
            bayes: BayesConfig::default(),
            visibility: None,
            tomography: TomographyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BayesConfig {
    pub enabled: bool,
    /// Reference draws held back from the likelihood family and used as test sequences.
    pub holdout: usize,
    pub sequence_length: usize,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            holdout: 1000,
            sequence_length: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub enabled: bool,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Detection noise in atoms folded into the projectors.
    pub noise_sigma: f64,
    pub husimi: bool,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            max_iterations: 5000,
            tolerance: 1e-10,
            noise_sigma: 0.0,
            husimi: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceConfig {
    pub lambda: f64,
    #[serde(default)]
    pub delta_over_omega: f64,
    #[serde(default = "default_omega_hz")]
    pub omega_hz: f64,
    #[serde(default = "default_atoms")]
    pub n_atoms: f64,
    #[serde(default = "default_contour")]
    pub separatrix_samples: usize,
    #[serde(default = "default_output_step")]
    pub output_step_ms: f64,
    #[serde(default)]
    pub trajectories: Vec<TrajectoryStart>,
}

fn default_omega_hz() -> f64 {
    20.0
}

fn default_atoms() -> f64 {
    430.0
}

fn default_contour() -> usize {
    512
}

fn default_output_step() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryStart {
    pub z: f64,
    pub phi_deg: f64,
    pub duration_ms: f64,
}

fn finite_all(values: &[f64], what: &str) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => invalid(format!("{what} contains non-finite value {v}")),
        None => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return invalid("experiment.n_atoms must be at least 1");
        }
        if self.times_ms.is_empty() || self.alpha_deg.is_empty() || self.theta_deg.is_empty() {
            return invalid("experiment needs at least one time, tomography angle and readout angle");
        }
        finite_all(&self.times_ms, "experiment.times_ms")?;
        finite_all(&self.alpha_deg, "experiment.alpha_deg")?;
        finite_all(&self.theta_deg, "experiment.theta_deg")?;
        if self.times_ms.iter().any(|&t| t < 0.0) {
            return invalid("evolution times must be non-negative");
        }
        self.noise.validate()?;
        match &self.dynamics {
            Dynamics::Ideal {
                lambda,
                omega_hz,
                delta_hz,
            } => {
                if !(lambda.is_finite() && *omega_hz > 0.0 && omega_hz.is_finite() && delta_hz.is_finite()) {
                    return invalid("ideal dynamics need finite Λ, finite δ and a positive Ω");
                }
            }
            Dynamics::Sequence { omega_hz, loss, pulses } => {
                if !(*omega_hz > 0.0 && omega_hz.is_finite()) {
                    return invalid("sequence dynamics need a positive Ω");
                }
                loss.validate()?;
                pulses.to_pulses()?;
            }
        }
        Ok(())
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 || self.reference_draws == 0 {
            return invalid("sampling draw counts must be positive");
        }
        Ok(())
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.bin_width {
            if !(w > 0.0) || !w.is_finite() {
                return invalid(format!("analysis.bin_width {w} must be positive"));
            }
        }
        if !(self.fit_range_deg > 0.0) {
            return invalid("analysis.fit_range_deg must be positive");
        }
        if let Some(v) = self.visibility {
            if !(v > 0.0 && v <= 1.0) {
                return invalid(format!("analysis.visibility {v} outside (0, 1]"));
            }
        }
        if self.bayes.enabled && self.bayes.sequence_length == 0 {
            return invalid("analysis.bayes.sequence_length must be positive");
        }
        if !(self.tomography.tolerance >= 0.0) || self.tomography.max_iterations == 0 {
            return invalid("tomography needs a positive iteration limit and non-negative tolerance");
        }
        if !(self.tomography.noise_sigma >= 0.0) {
            return invalid("tomography noise must be non-negative");
        }
        if self.jackknife.block_sizes.as_ref().is_some_and(|b| b.contains(&0)) || self.jackknife.max_block == 0 {
            return invalid("jackknife block sizes must be positive");
        }
        Ok(())
    }
}

impl PhaseSpaceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() || !self.delta_over_omega.is_finite() {
            return invalid("phasespace needs Λ > 0 and finite δ/Ω");
        }
        if !(self.omega_hz > 0.0 && self.n_atoms > 0.0 && self.output_step_ms > 0.0) {
            return invalid("phasespace Ω, atom number and output step must be positive");
        }
        for t in &self.trajectories {
            if !(t.z.abs() <= 1.0) || !t.phi_deg.is_finite() || !(t.duration_ms > 0.0) {
                return invalid(format!("trajectory start {t:?} needs |z| ≤ 1 and a positive duration"));
            }
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if let Some(e) = &cfg.experiment {
            e.validate()?;
        }
        if let Some(p) = &cfg.phasespace {
            p.validate()?;
        }
        cfg.sampling.validate()?;
        cfg.analysis.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = RunConfig::from_json(
            r#"{"experiment": {"n_atoms": 10, "dynamics": {"model": "ideal", "lambda": 1.5, "omega_hz": 20},
                "times_ms": [5], "theta_deg": [0]}}"#,
        )
        .unwrap();
        let e = cfg.experiment.unwrap();
        assert_eq!(e.alpha_deg, vec![0.0]);
        assert_eq!(cfg.sampling.reference_draws, 2000);
        assert!(cfg.analysis.bayes.enabled);
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        let bad_key = r#"{"experiment": null, "extra": 1}"#;
        assert!(RunConfig::from_json(bad_key).is_err());
        let bad_lambda = r#"{"experiment": {"n_atoms": 10, "dynamics": {"model": "ideal", "lambda": "big", "omega_hz": 20}, "times_ms": [5]}}"#;
        assert!(RunConfig::from_json(bad_lambda).is_err());
        let negative = r#"{"sampling": {"draws": 0}}"#;
        assert!(RunConfig::from_json(negative).is_err());
    }

    #[test]
    fn default_pulses_round_trip() {
        let p = PulsesConfig::default().to_pulses().unwrap();
        let d = SequencePulses::default();
        assert!((p.preparation.phase_offset - d.preparation.phase_offset).abs() < 1e-15);
        assert!((p.readout.rabi_frequency - d.readout.rabi_frequency).abs() < 1e-9);
    }
}
