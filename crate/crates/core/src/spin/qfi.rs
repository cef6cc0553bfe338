use nalgebra::{Matrix3, SymmetricEigen};

use super::{DickeState, SpinOperators};
use crate::error::{Error, Result};
use crate::C64;

const NORM_TOL: f64 = 1e-10;

/// Mean spin vector `(⟨Jx⟩, ⟨Jy⟩, ⟨Jz⟩)`.
pub fn mean_spin(state: &DickeState, ops: &SpinOperators) -> [f64; 3] {
    ops.expectations(state.amplitudes())
}

/// Symmetrized covariance `Re⟨J_a J_b⟩ − ⟨J_a⟩⟨J_b⟩`.
pub fn covariance(state: &DickeState, ops: &SpinOperators) -> Result<Matrix3<f64>> {
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2));
    }
    if state.n_atoms() != ops.n_atoms() {
        return Err(Error::DimensionMismatch {
            expected: ops.dim(),
            got: state.dim(),
        });
    }
    let psi = state.amplitudes();
    let v = [ops.apply_jx(psi), ops.apply_jy(psi), ops.apply_jz(psi)];
    let mean = mean_spin(state, ops);
    let mut cov = Matrix3::zeros();
    for a in 0..3 {
        for b in a..3 {
            let dot: C64 = v[a].iter().zip(&v[b]).map(|(x, y)| x.conj() * y).sum();
            let c = dot.re - mean[a] * mean[b];
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    Ok(cov)
}

/// Quantum Fisher information `4 max_n Var(n·J)` of a pure state.
pub fn qfi(state: &DickeState, ops: &SpinOperators) -> Result<f64> {
    let cov = covariance(state, ops)?;
    let eig = SymmetricEigen::new(cov);
    Ok(4.0 * eig.eigenvalues.max().max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_operators, coherent_state};
    use approx::assert_abs_diff_eq;

    #[test]
    fn coherent_state_reaches_n() {
        let ops = build_operators(100).unwrap();
        for (t, p) in [(0.3, 1.0), (1.5708, 3.14159), (2.9, -0.4)] {
            let s = coherent_state(100, t, p).unwrap();
            assert_abs_diff_eq!(qfi(&s, &ops).unwrap(), 100.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn cat_state_reaches_heisenberg() {
        let n = 30;
        let ops = build_operators(n).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); n + 1];
        amps[0] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        amps[n] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        let s = DickeState::new(n, amps).unwrap();
        assert_abs_diff_eq!(qfi(&s, &ops).unwrap(), (n * n) as f64, epsilon = 1e-9);
    }

    #[test]
    fn polar_eigenstate_has_transverse_variance_only() {
        let n = 16;
        let ops = build_operators(n).unwrap();
        let s = DickeState::basis(n, n).unwrap();
        let cov = covariance(&s, &ops).unwrap();
        assert_abs_diff_eq!(cov[(2, 2)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(qfi(&s, &ops).unwrap(), n as f64, epsilon = 1e-10);
    }

    #[test]
    fn rejects_unnormalized() {
        let ops = build_operators(2).unwrap();
        let s = DickeState::from_raw_unchecked(2, vec![C64::new(1.0, 0.0); 3]);
        assert!(qfi(&s, &ops).is_err());
    }
}
