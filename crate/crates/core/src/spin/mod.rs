//! Dicke-basis representation of N two-level atoms.

mod hamiltonian;
mod operators;
mod propagate;
mod pulse;
mod qfi;
mod sequence;
mod state;

pub use hamiltonian::{josephson_hamiltonian, HamiltonianParams, LossModel, Tridiagonal};
pub use operators::{build_operators, SpinOperators};
pub use propagate::{evolve, evolve_constant, LossSchedule, Schedule, StepControl};
pub use pulse::{apply_pulse, rotate, PulseModel, PulseSpec};
pub use qfi::{covariance, mean_spin, qfi};
pub use sequence::{run_sequence, SequencePulses};
pub use state::{coherent_state, fidelity, DickeState};
