//! Outcome distributions of the population imbalance `z = 2m/N`.

mod distribution;
mod grid;
pub mod io;
mod noise;
mod sampling;

pub use distribution::{distribution_derivative, outcome_distribution, outcome_family_point, ProbabilityDistribution, Readout, Setting};
pub use grid::BinGrid;
pub use noise::{convolve_noise, convolve_with, gaussian_kernel, NoiseKind, NoiseModel};
pub use sampling::{sample, sample_draws, Draws, EmpiricalDistribution};

/// Rebins onto bins `new_width` wide, grouping from the lowest bin.
pub trait Rebin: Sized {
    fn rebin(&self, new_width: f64) -> crate::Result<Self>;
}
