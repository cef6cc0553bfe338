use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::SpinOperators;
use crate::error::{invalid, Result};
use crate::C64;

/// Parameters of `H = χ Jz² − Ω Jx + δ Jz`, all angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub chi: f64,
    pub omega: f64,
    pub delta: f64,
}

impl HamiltonianParams {
    pub fn new(chi: f64, omega: f64, delta: f64) -> Result<Self> {
        if !(chi.is_finite() && omega.is_finite() && delta.is_finite()) {
            return invalid("Hamiltonian parameters must be finite");
        }
        if omega < 0.0 {
            return invalid("Rabi coupling must be non-negative");
        }
        Ok(Self { chi, omega, delta })
    }

    /// Parameters with a prescribed `Λ = Nχ/Ω`.
    pub fn from_lambda(n_atoms: usize, lambda: f64, omega: f64, delta: f64) -> Result<Self> {
        if n_atoms == 0 {
            return invalid("n_atoms must be at least 1");
        }
        Self::new(lambda * omega / n_atoms as f64, omega, delta)
    }

    /// `Λ = Nχ/Ω`; infinite when `Ω = 0`.
    pub fn lambda(&self, n_atoms: usize) -> f64 {
        n_atoms as f64 * self.chi / self.omega
    }
}

/// Atom-number decay and the induced drift of `χ` and `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossModel {
    /// Atom number at `t = 0`.
    pub n0: f64,
    /// Exponential decay time in seconds; `f64::INFINITY` disables loss.
    pub tau: f64,
    /// Nonlinearity (rad/s) at `chi_ref_atoms`.
    pub chi0: f64,
    /// Atom number at which `chi0` is quoted.
    pub chi_ref_atoms: f64,
    /// Detuning offset in Hz.
    pub delta0: f64,
    /// Detuning slope in Hz per √atom.
    pub delta_n: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        Self {
            n0: 470.0,
            tau: 0.110,
            chi0: 2.0 * PI * 0.064,
            chi_ref_atoms: 470.0,
            delta0: 16.3,
            delta_n: 0.68,
        }
    }
}

impl LossModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.n0 > 0.0 && self.chi_ref_atoms > 0.0) {
            return invalid("loss model atom numbers must be positive");
        }
        if !(self.tau > 0.0) {
            return invalid("loss decay time must be positive");
        }
        if !(self.chi0.is_finite() && self.delta0.is_finite() && self.delta_n.is_finite()) {
            return invalid("loss model coefficients must be finite");
        }
        Ok(())
    }

    /// Loss-free model with constant `χ` and zero detuning at `n_atoms`.
    pub fn constant(n_atoms: f64, chi: f64) -> Self {
        Self {
            n0: n_atoms,
            tau: f64::INFINITY,
            chi0: chi,
            chi_ref_atoms: n_atoms,
            delta0: 0.0,
            delta_n: 0.0,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.tau.is_infinite() && self.delta_n == 0.0
    }

    /// Same model with `n0` chosen so that `N(t_final) = n_final`.
    pub fn anchored_to_final(&self, n_final: f64, t_final: f64) -> Self {
        Self {
            n0: n_final * (t_final / self.tau).exp(),
            ..*self
        }
    }

    /// `N(t) = N₀ e^{−t/τ}`.
    pub fn atoms_at(&self, t: f64) -> f64 {
        self.n0 * (-t / self.tau).exp()
    }

    /// `χ(N) = χ₀ √(N_ref / N)`.
    pub fn chi(&self, n: f64) -> f64 {
        self.chi0 * (self.chi_ref_atoms / n).sqrt()
    }

    /// `δ(N) = 2π (δ₀ − δ_N √N)` in rad/s.
    pub fn delta(&self, n: f64) -> f64 {
        2.0 * PI * (self.delta0 - self.delta_n * n.sqrt())
    }

    pub fn params_at(&self, t: f64, omega: f64) -> HamiltonianParams {
        let n = self.atoms_at(t);
        HamiltonianParams {
            chi: self.chi(n),
            omega,
            delta: self.delta(n),
        }
    }
}

/// Hermitian tridiagonal matrix stored by its diagonal and lower band.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `lower[k] = H[k+1, k]`; the upper band is its conjugate.
    pub lower: Vec<C64>,
}

impl Tridiagonal {
    /// `χ Jz² + δ Jz − Ω (cos φ Jx + sin φ Jy)`.
    pub fn with_coupling(ops: &SpinOperators, chi: f64, delta: f64, omega: f64, axis_phase: f64) -> Self {
        let diag = ops.m_values().iter().map(|&m| chi * m * m + delta * m).collect();
        let phase = C64::from_polar(1.0, -axis_phase);
        let lower = ops.ladder().iter().map(|&l| phase * (-omega * l / 2.0)).collect();
        Self { diag, lower }
    }

    pub fn josephson(ops: &SpinOperators, p: &HamiltonianParams) -> Self {
        Self::with_coupling(ops, p.chi, p.delta, p.omega, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        self.apply_into(psi, &mut out);
        out
    }

    pub(crate) fn apply_into(&self, psi: &[C64], out: &mut [C64]) {
        for ((o, &d), a) in out.iter_mut().zip(&self.diag).zip(psi) {
            *o = a * d;
        }
        for (k, l) in self.lower.iter().enumerate() {
            out[k + 1] += l * psi[k];
            out[k] += l.conj() * psi[k + 1];
        }
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..n {
            let mut r = 0.0;
            if k > 0 {
                r += self.lower[k - 1].norm();
            }
            if k + 1 < n {
                r += self.lower[k].norm();
            }
            lo = lo.min(self.diag[k] - r);
            hi = hi.max(self.diag[k] + r);
        }
        (lo, hi)
    }

    pub fn expectation(&self, psi: &[C64]) -> f64 {
        self.apply(psi)
            .iter()
            .zip(psi)
            .map(|(h, a)| (a.conj() * h).re)
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for k in 0..n {
            out[(k, k)] = C64::new(self.diag[k], 0.0);
        }
        for (k, l) in self.lower.iter().enumerate() {
            out[(k + 1, k)] = *l;
            out[(k, k + 1)] = l.conj();
        }
        out
    }
}

/// Dense `H = χ Jz² − Ω Jx + δ Jz`.
pub fn josephson_hamiltonian(params: &HamiltonianParams, ops: &SpinOperators) -> DMatrix<f64> {
    let jz = ops.jz();
    &jz * &jz * params.chi - ops.jx() * params.omega + jz * params.delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::build_operators;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_nonlinearity_is_diagonal() {
        let ops = build_operators(4).unwrap();
        let h = josephson_hamiltonian(&HamiltonianParams::new(0.7, 0.0, 0.0).unwrap(), &ops);
        for (k, &m) in ops.m_values().iter().enumerate() {
            assert_abs_diff_eq!(h[(k, k)], 0.7 * m * m);
        }
        assert_abs_diff_eq!(h.sum() - h.trace(), 0.0);
    }

    #[test]
    fn pure_coupling_spin_one() {
        let ops = build_operators(2).unwrap();
        let h = josephson_hamiltonian(&HamiltonianParams::new(0.0, 1.0, 0.0).unwrap(), &ops);
        assert_abs_diff_eq!(h[(0, 1)], -1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(h[(2, 1)], -1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert!((h.clone() - h.transpose()).amax() < 1e-15);
    }

    #[test]
    fn lambda_sets_nonlinearity() {
        let p = HamiltonianParams::from_lambda(430, 1.5, 2.0 * PI * 20.0, 0.0).unwrap();
        assert_abs_diff_eq!(p.chi / (2.0 * PI), 0.0698, epsilon = 1e-4);
        assert_abs_diff_eq!(p.lambda(430), 1.5, epsilon = 1e-12);
        assert!(HamiltonianParams::new(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn loss_model_laws() {
        let lm = LossModel::default();
        assert_abs_diff_eq!(lm.atoms_at(0.0), 470.0);
        assert!(lm.atoms_at(0.01) < lm.atoms_at(0.0));
        assert_abs_diff_eq!(lm.chi(470.0), 2.0 * PI * 0.064, epsilon = 1e-15);
        assert_abs_diff_eq!(lm.chi(470.0 / 4.0), 2.0 * 2.0 * PI * 0.064, epsilon = 1e-12);
        assert_abs_diff_eq!(lm.delta(400.0), 2.0 * PI * (16.3 - 0.68 * 20.0), epsilon = 1e-12);
        let anchored = lm.anchored_to_final(430.0, 0.025);
        assert_abs_diff_eq!(anchored.atoms_at(0.025), 430.0, epsilon = 1e-9);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let ops = build_operators(6).unwrap();
        let t = Tridiagonal::with_coupling(&ops, 0.3, -0.2, 1.7, 0.9);
        let dense = t.to_dense();
        let jy = ops.jy();
        let jx = ops.jx().map(|x| C64::new(x, 0.0));
        let jz = ops.jz().map(|x| C64::new(x, 0.0));
        let expect = &jz * &jz * C64::new(0.3, 0.0) + &jz * C64::new(-0.2, 0.0)
            - (jx * C64::new(0.9f64.cos(), 0.0) + jy * C64::new(0.9f64.sin(), 0.0)) * C64::new(1.7, 0.0);
        assert!((dense - expect).iter().all(|c| c.norm() < 1e-13));
        let (lo, hi) = t.spectral_bounds();
        assert!(lo < hi);
    }
}
