use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{apply_pulse, evolve, DickeState, LossModel, LossSchedule, PulseSpec, SpinOperators, StepControl};
use crate::error::{invalid, Error, Result};

/// Pulse program of the interferometric sequence.
///
/// The angles of `tomography` and `readout` are overridden by the run's
/// `α` and `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequencePulses {
    pub preparation: PulseSpec,
    pub echo: PulseSpec,
    pub tomography: PulseSpec,
    pub readout: PulseSpec,
}

impl Default for SequencePulses {
    fn default() -> Self {
        let fast = 2.0 * PI * 320.0;
        Self {
            preparation: PulseSpec {
                phase_offset: 3f64.to_radians(),
                ..PulseSpec::new(FRAC_PI_2, FRAC_PI_2, fast)
            },
            echo: PulseSpec::new(PI, PI, fast),
            tomography: PulseSpec::new(0.0, 0.0, fast),
            readout: PulseSpec::new(FRAC_PI_2, 0.0, 2.0 * PI * 160.0),
        }
    }
}

impl SequencePulses {
    /// Same program without the preparation phase offset.
    pub fn ideal() -> Self {
        let mut p = Self::default();
        p.preparation.phase_offset = 0.0;
        p
    }
}

/// Runs the full sequence starting from all atoms in the lower mode:
/// preparation, half the evolution, spin echo, second half, tomography
/// rotation `alpha`, final rotation `theta`.
#[allow(clippy::too_many_arguments)]
pub fn run_sequence(
    ops: &SpinOperators,
    loss: &LossModel,
    omega: f64,
    evolution_time: f64,
    alpha: f64,
    theta: f64,
    pulses: &SequencePulses,
    control: &StepControl,
) -> Result<DickeState> {
    if !(evolution_time >= 0.0) || !evolution_time.is_finite() {
        return invalid("evolution time must be finite and non-negative");
    }
    loss.validate()?;
    let half = evolution_time / 2.0;
    let mut state = DickeState::basis(ops.n_atoms(), 0)?;
    state = apply_pulse(&state, &pulses.preparation, &loss.params_at(0.0, 0.0), ops)?;
    let first = LossSchedule {
        loss: *loss,
        omega,
        t_offset: 0.0,
    };
    state = evolve(&state, &first, ops, half, control)?;
    state = apply_pulse(&state, &pulses.echo, &loss.params_at(half, 0.0), ops)?;
    let second = LossSchedule { t_offset: half, ..first };
    state = evolve(&state, &second, ops, half, control)?;
    let background = loss.params_at(evolution_time, 0.0);
    let tomo = PulseSpec {
        angle: alpha,
        ..pulses.tomography
    };
    state = apply_pulse(&state, &tomo, &background, ops)?;
    let readout = PulseSpec {
        angle: theta,
        ..pulses.readout
    };
    apply_pulse(&state, &readout, &background, ops).map_err(|e| match e {
        Error::NotNormalized(x) => Error::NormDrift(x),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_operators, coherent_state, fidelity};

    #[test]
    fn zero_time_prepares_unstable_point() {
        let n = 40;
        let ops = build_operators(n).unwrap();
        let loss = LossModel::default();
        let out = run_sequence(&ops, &loss, 2.0 * PI * 20.0, 0.0, 0.0, 0.0, &SequencePulses::ideal(), &StepControl::default()).unwrap();
        let css = coherent_state(n, FRAC_PI_2, PI).unwrap();
        assert!((fidelity(&out, &css) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phase_offset_tilts_preparation() {
        let n = 40;
        let ops = build_operators(n).unwrap();
        let loss = LossModel::default();
        let out = run_sequence(&ops, &loss, 2.0 * PI * 20.0, 0.0, 0.0, 0.0, &SequencePulses::default(), &StepControl::default()).unwrap();
        let e = ops.expectations(out.amplitudes());
        let j = n as f64 / 2.0;
        assert!((e[0] / j + 1.0).abs() < 2e-3);
        assert!((e[1] / j).abs() > 0.04);
    }
}
