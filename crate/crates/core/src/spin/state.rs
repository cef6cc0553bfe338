use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::ln_binomial_row;
use crate::C64;

const NORM_TOL: f64 = 1e-10;

/// Pure state of `n_atoms` spin-1/2 particles in the symmetric subspace.
///
/// `amplitudes[k]` is the amplitude on the Dicke state with `m = k − N/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct DickeState {
    n_atoms: usize,
    amplitudes: Vec<C64>,
}

#[derive(Deserialize)]
struct RawState {
    n_atoms: usize,
    amplitudes: Vec<C64>,
}

impl TryFrom<RawState> for DickeState {
    type Error = Error;
    fn try_from(raw: RawState) -> Result<Self> {
        DickeState::new(raw.n_atoms, raw.amplitudes)
    }
}

impl DickeState {
    /// Validates length and normalization.
    pub fn new(n_atoms: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n_atoms == 0 {
            return invalid("n_atoms must be at least 1");
        }
        if amplitudes.len() != n_atoms + 1 {
            return Err(Error::DimensionMismatch {
                expected: n_atoms + 1,
                got: amplitudes.len(),
            });
        }
        let norm2 = norm_sqr(&amplitudes);
        if (norm2 - 1.0).abs() > NORM_TOL || !norm2.is_finite() {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { n_atoms, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(n_atoms: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Self::new(n_atoms, amplitudes)
    }

    /// Dicke state `|J, m⟩` addressed by its basis index `k = m + J`.
    pub fn basis(n_atoms: usize, k: usize) -> Result<Self> {
        if k > n_atoms {
            return invalid(format!("basis index {k} exceeds {n_atoms}"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n_atoms + 1];
        amps[k] = C64::new(1.0, 0.0);
        Self::new(n_atoms, amps)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Populations `|amplitude_k|²`.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DickeState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub(crate) fn from_raw_unchecked(n_atoms: usize, amplitudes: Vec<C64>) -> Self {
        Self { n_atoms, amplitudes }
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &DickeState, b: &DickeState) -> f64 {
    a.inner(b).norm_sqr()
}

/// Coherent spin state pointing along `(sin ϑ cos φ, sin ϑ sin φ, −cos ϑ)`.
///
/// `ϑ = 0` is the state `m = −J` and `ϑ = π` the state `m = +J`.
pub fn coherent_state(n_atoms: usize, polar: f64, azimuth: f64) -> Result<DickeState> {
    if n_atoms == 0 {
        return invalid("n_atoms must be at least 1");
    }
    if !(0.0..=std::f64::consts::PI).contains(&polar) || !azimuth.is_finite() {
        return invalid(format!("polar angle {polar} outside [0, π]"));
    }
    let n = n_atoms;
    let s = (polar / 2.0).sin();
    let c = (polar / 2.0).cos();
    // poles are exact limits of the stereographic parametrization
    if s <= 0.0 {
        return DickeState::basis(n, 0);
    }
    if c <= 1e-300 || polar == std::f64::consts::PI {
        return DickeState::basis(n, n);
    }
    let ln_s = s.ln();
    let ln_c = c.ln();
    let lnb = ln_binomial_row(n);
    let amps = (0..=n)
        .map(|k| {
            let ln_mag = 0.5 * lnb[k] + k as f64 * ln_s + (n - k) as f64 * ln_c;
            C64::from_polar(ln_mag.exp(), -(k as f64) * azimuth)
        })
        .collect();
    DickeState::normalized(n, amps)
}
