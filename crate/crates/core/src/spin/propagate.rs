use super::{DickeState, HamiltonianParams, LossModel, SpinOperators, Tridiagonal};
use crate::error::{invalid, Error, Result};
use crate::special::bessel_j_sequence;
use crate::C64;

/// Time-dependent generator of the evolution.
pub trait Schedule: Sync {
    /// Hamiltonian at time `t` measured from the start of the evolution.
    fn generator(&self, ops: &SpinOperators, t: f64) -> Tridiagonal;

    /// Constant schedules are propagated in a single exact step.
    fn is_constant(&self) -> bool {
        false
    }
}

impl Schedule for HamiltonianParams {
    fn generator(&self, ops: &SpinOperators, _t: f64) -> Tridiagonal {
        Tridiagonal::josephson(ops, self)
    }

    fn is_constant(&self) -> bool {
        true
    }
}

/// Josephson Hamiltonian whose `χ` and `δ` follow a [`LossModel`].
#[derive(Debug, Clone, Copy)]
pub struct LossSchedule {
    pub loss: LossModel,
    pub omega: f64,
    /// Absolute time of the schedule's origin.
    pub t_offset: f64,
}

impl Schedule for LossSchedule {
    fn generator(&self, ops: &SpinOperators, t: f64) -> Tridiagonal {
        Tridiagonal::josephson(ops, &self.loss.params_at(self.t_offset + t, self.omega))
    }

    fn is_constant(&self) -> bool {
        self.loss.is_constant()
    }
}

/// Step-size control of piecewise-constant propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub initial_step: f64,
    /// Bound on `1 − |⟨ψ_h|ψ_{h/2}⟩|²` between successive refinements.
    pub tolerance: f64,
    pub max_halvings: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial_step: 0.25e-3,
            tolerance: 1e-10,
            max_halvings: 12,
        }
    }
}

const NORM_DRIFT_TOL: f64 = 1e-10;

/// `exp(−i H dt) ψ` by Chebyshev expansion, accurate to machine precision.
pub(crate) fn chebyshev_propagate(h: &Tridiagonal, psi: &[C64], dt: f64) -> Vec<C64> {
    let (lo, hi) = h.spectral_bounds();
    let centre = 0.5 * (hi + lo);
    let half_width = 0.5 * (hi - lo);
    let global = C64::from_polar(1.0, -centre * dt);
    let x = half_width * dt.abs();
    if x < 1e-300 {
        return psi.iter().map(|a| a * global).collect();
    }
    let kmax = (x + 12.0 * x.cbrt() + 40.0).ceil() as usize;
    let bessel = bessel_j_sequence(x, kmax);
    let mut order = kmax;
    while order > 1 && (order as f64) > x && bessel[order].abs() < 1e-18 {
        order -= 1;
    }
    let sign = dt.signum();
    let n = psi.len();
    let scale = 1.0 / half_width;
    let mut prev: Vec<C64> = psi.to_vec();
    let mut cur = vec![C64::new(0.0, 0.0); n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    h.apply_into(&prev, &mut cur);
    for (c, p) in cur.iter_mut().zip(&prev) {
        *c = (*c - p * centre) * scale;
    }
    let mut out: Vec<C64> = prev.iter().map(|a| a * bessel[0]).collect();
    // (−i)^k with the sign of dt, cycling every four orders
    let mut phase = C64::new(0.0, -sign);
    let step_phase = C64::new(0.0, -sign);
    for k in 1..=order {
        let coef = phase * (2.0 * bessel[k]);
        for (o, c) in out.iter_mut().zip(&cur) {
            *o += c * coef;
        }
        if k == order {
            break;
        }
        h.apply_into(&cur, &mut buf);
        for ((b, c), p) in buf.iter_mut().zip(&cur).zip(&prev) {
            *b = (*b - c * centre) * (2.0 * scale) - p;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut buf);
        phase *= step_phase;
    }
    for o in out.iter_mut() {
        *o *= global;
    }
    out
}

fn check_input(state: &DickeState, ops: &SpinOperators) -> Result<()> {
    if state.n_atoms() != ops.n_atoms() {
        return Err(Error::DimensionMismatch {
            expected: ops.dim(),
            got: state.dim(),
        });
    }
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > NORM_DRIFT_TOL {
        return Err(Error::NotNormalized(n2));
    }
    Ok(())
}

fn finish(n_atoms: usize, amps: Vec<C64>) -> Result<DickeState> {
    let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (n2 - 1.0).abs() > NORM_DRIFT_TOL {
        return Err(Error::NormDrift((n2 - 1.0).abs()));
    }
    Ok(DickeState::from_raw_unchecked(n_atoms, amps))
}

fn piecewise(schedule: &dyn Schedule, ops: &SpinOperators, psi: &[C64], duration: f64, steps: usize) -> Vec<C64> {
    let dt = duration / steps as f64;
    let mut cur = psi.to_vec();
    for s in 0..steps {
        let h = schedule.generator(ops, (s as f64 + 0.5) * dt);
        cur = chebyshev_propagate(&h, &cur, dt);
    }
    cur
}

/// Unitary evolution for `duration` seconds under a constant Hamiltonian.
pub fn evolve_constant(state: &DickeState, h: &Tridiagonal, duration: f64) -> Result<DickeState> {
    if h.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: state.dim(),
        });
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return invalid("duration must be finite and non-negative");
    }
    if duration == 0.0 {
        return Ok(state.clone());
    }
    finish(state.n_atoms(), chebyshev_propagate(h, state.amplitudes(), duration))
}

/// Unitary evolution under a piecewise-constant schedule sampled at step midpoints.
///
/// The step is halved from `control.initial_step` until two successive
/// refinements agree to `control.tolerance` in overlap defect.
pub fn evolve(
    state: &DickeState,
    schedule: &dyn Schedule,
    ops: &SpinOperators,
    duration: f64,
    control: &StepControl,
) -> Result<DickeState> {
    check_input(state, ops)?;
    if !(duration >= 0.0) || !duration.is_finite() {
        return invalid("duration must be finite and non-negative");
    }
    if duration == 0.0 {
        return Ok(state.clone());
    }
    if schedule.is_constant() {
        let h = schedule.generator(ops, 0.0);
        return finish(state.n_atoms(), chebyshev_propagate(&h, state.amplitudes(), duration));
    }
    if !(control.initial_step > 0.0) {
        return invalid("initial step must be positive");
    }
    let mut steps = (duration / control.initial_step).ceil().max(1.0) as usize;
    let mut coarse = piecewise(schedule, ops, state.amplitudes(), duration, steps);
    let mut defect = f64::INFINITY;
    for _ in 0..control.max_halvings {
        steps *= 2;
        let fine = piecewise(schedule, ops, state.amplitudes(), duration, steps);
        let overlap: C64 = coarse.iter().zip(&fine).map(|(a, b)| a.conj() * b).sum();
        defect = (1.0 - overlap.norm_sqr()).abs();
        if defect < control.tolerance {
            return finish(state.n_atoms(), fine);
        }
        coarse = fine;
    }
    Err(Error::NonConvergence {
        halvings: control.max_halvings,
        defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_operators, coherent_state, fidelity};
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;
    use std::f64::consts::PI;

    #[test]
    fn zero_duration_is_identity() {
        let ops = build_operators(8).unwrap();
        let s = coherent_state(8, 0.4, 0.1).unwrap();
        let p = HamiltonianParams::new(1.0, 2.0, 0.3).unwrap();
        let out = evolve(&s, &p, &ops, 0.0, &StepControl::default()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn quarter_rabi_cycle_reaches_equator() {
        let n = 50;
        let ops = build_operators(n).unwrap();
        let s = DickeState::basis(n, 0).unwrap();
        let omega = 2.0 * PI * 20.0;
        let p = HamiltonianParams::new(0.0, omega, 0.0).unwrap();
        let out = evolve(&s, &p, &ops, PI / (2.0 * omega), &StepControl::default()).unwrap();
        let e = ops.expectations(out.amplitudes());
        assert_abs_diff_eq!(e[2], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn chebyshev_agrees_with_eigendecomposition() {
        let n = 30;
        let ops = build_operators(n).unwrap();
        let p = HamiltonianParams::from_lambda(n, 1.5, 2.0 * PI * 20.0, 3.0).unwrap();
        let s = coherent_state(n, 1.2, 2.8).unwrap();
        let t = 0.013;
        let out = evolve(&s, &p, &ops, t, &StepControl::default()).unwrap();
        let h = super::super::josephson_hamiltonian(&p, &ops);
        let eig = SymmetricEigen::new(h);
        let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let psi = nalgebra::DVector::from_column_slice(s.amplitudes());
        let mut c = v.adjoint() * psi;
        for (ci, &e) in c.iter_mut().zip(eig.eigenvalues.iter()) {
            *ci *= C64::from_polar(1.0, -e * t);
        }
        let reference = v * c;
        for (a, b) in out.amplitudes().iter().zip(reference.iter()) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn energy_conserved_for_constant_parameters() {
        let n = 120;
        let ops = build_operators(n).unwrap();
        let p = HamiltonianParams::from_lambda(n, 1.5, 2.0 * PI * 20.0, 1.0).unwrap();
        let s = coherent_state(n, PI / 2.0, PI).unwrap();
        let h = Tridiagonal::josephson(&ops, &p);
        let out = evolve(&s, &p, &ops, 0.02, &StepControl::default()).unwrap();
        let e0 = h.expectation(s.amplitudes());
        let e1 = h.expectation(out.amplitudes());
        assert!((e0 - e1).abs() <= 1e-8 * e0.abs());
    }

    #[test]
    fn loss_schedule_converges() {
        let n = 60;
        let ops = build_operators(n).unwrap();
        let sched = LossSchedule {
            loss: LossModel::default(),
            omega: 2.0 * PI * 20.0,
            t_offset: 0.0,
        };
        let s = coherent_state(n, PI / 2.0, PI).unwrap();
        let out = evolve(&s, &sched, &ops, 0.02, &StepControl::default()).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-10);
        let fine = evolve(
            &s,
            &sched,
            &ops,
            0.02,
            &StepControl {
                initial_step: 1e-5,
                ..StepControl::default()
            },
        )
        .unwrap();
        assert!(1.0 - fidelity(&out, &fine) < 1e-9);
    }

    #[test]
    fn reports_non_convergence() {
        let n = 40;
        let ops = build_operators(n).unwrap();
        let sched = LossSchedule {
            loss: LossModel::default(),
            omega: 2.0 * PI * 20.0,
            t_offset: 0.0,
        };
        let s = coherent_state(n, PI / 2.0, PI).unwrap();
        let ctl = StepControl {
            max_halvings: 1,
            tolerance: 0.0,
            ..StepControl::default()
        };
        assert!(matches!(
            evolve(&s, &sched, &ops, 0.02, &ctl),
            Err(Error::NonConvergence { .. })
        ));
    }
}
