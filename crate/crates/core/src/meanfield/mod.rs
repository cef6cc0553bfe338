//! Classical large-`N` limit: the non-rigid pendulum in imbalance `z` and relative phase `φ`.
//!
//! With `h(z, φ) = Λz²/2 − √(1−z²) cos φ + (δ/Ω) z` the energy is `(NΩ/2)·h` and
//! the pair `(z, φ)` is canonical up to the scale `NΩ/2`, so
//! `ż = −Ω ∂h/∂φ` and `φ̇ = Ω ∂h/∂z`.

mod dynamics;

pub use dynamics::{
    classical_energy, contour_csv, fixed_points, separatrix, trajectory, ClassicalParams, FixedPoint, PhasePoint, Stability,
    Trajectory, TrajectoryOptions,
};
