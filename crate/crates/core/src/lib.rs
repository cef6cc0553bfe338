//! Collective-spin dynamics of two-mode condensates and estimation of the
//! Fisher information from sampled population-imbalance distributions.
//!
//! The crate is organized bottom-up:
//!
//! * [`spin`] builds Dicke-basis states, operators, Hamiltonians and pulse programs.
//! * [`measure`] turns states into binned imbalance distributions, adds noise and samples.
//! * [`estimate`] extracts Fisher information, squeezing and Bayesian sensitivities.
//! * [`tomo`] reconstructs density matrices and Husimi maps.
//! * [`meanfield`] analyses the classical pendulum phase space.
//! * [`model`] evaluates ideal-model figures of merit along a time scan.
//! * [`cli`] drives all of the above from JSON configuration files.

pub mod cli;
pub mod error;
pub mod estimate;
pub mod meanfield;
pub mod measure;
pub mod model;
pub mod special;
pub mod spin;
pub mod tomo;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
