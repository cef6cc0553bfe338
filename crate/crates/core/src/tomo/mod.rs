//! Density-matrix reconstruction in the symmetric subspace and Husimi maps.

mod density;
mod husimi;
mod mle;

pub use density::DensityMatrixSym;
pub use husimi::{husimi, HusimiMap, HUSIMI_GRID};
pub use mle::{mle_from_frequencies, mle_reconstruct, ramp_settings, MleOptions, MleResult};
