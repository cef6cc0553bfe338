use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spin::DickeState;
use crate::C64;

const TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite operator on the spin-`N/2` space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity", into = "RawDensity")]
pub struct DensityMatrixSym {
    n_atoms: usize,
    matrix: DMatrix<C64>,
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    n_atoms: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<DensityMatrixSym> for RawDensity {
    fn from(d: DensityMatrixSym) -> Self {
        let n = d.matrix.nrows();
        let rows = |f: fn(&C64) -> f64| (0..n).map(|i| (0..n).map(|j| f(&d.matrix[(i, j)])).collect()).collect();
        RawDensity {
            n_atoms: d.n_atoms,
            re: rows(|c| c.re),
            im: rows(|c| c.im),
        }
    }
}

impl TryFrom<RawDensity> for DensityMatrixSym {
    type Error = Error;
    fn try_from(raw: RawDensity) -> Result<Self> {
        let n = raw.n_atoms + 1;
        if raw.re.len() != n || raw.im.len() != n || raw.re.iter().chain(&raw.im).any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: raw.re.len(),
            });
        }
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(raw.re[i][j], raw.im[i][j]));
        DensityMatrixSym::new(raw.n_atoms, m)
    }
}

impl DensityMatrixSym {
    /// Validates hermiticity, trace and positivity within `1e−10`.
    pub fn new(n_atoms: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let n = n_atoms + 1;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        let herm = (&matrix - matrix.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm > TOL {
            return invalid(format!("matrix is not Hermitian (defect {herm:e})"));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return invalid(format!("trace {tr} differs from one"));
        }
        let d = Self { n_atoms, matrix };
        let low = d.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if low < -TOL {
            return invalid(format!("negative eigenvalue {low:e}"));
        }
        Ok(d)
    }

    pub(crate) fn from_unchecked(n_atoms: usize, matrix: DMatrix<C64>) -> Self {
        Self { n_atoms, matrix }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &DickeState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self {
            n_atoms: state.n_atoms(),
            matrix: &v * v.adjoint(),
        }
    }

    /// `I/(N+1)`.
    pub fn maximally_mixed(n_atoms: usize) -> Self {
        let n = n_atoms + 1;
        Self {
            n_atoms,
            matrix: DMatrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0),
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Eigenvalues of the Hermitian matrix, via its real symmetric embedding.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.real_embedding());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        // each eigenvalue appears twice in the embedding
        v.into_iter().step_by(2).collect()
    }

    fn real_embedding(&self) -> DMatrix<f64> {
        let n = self.matrix.nrows();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let c = self.matrix[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => c.re,
                (true, false) => -c.im,
                (false, true) => c.im,
            }
        })
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn leading_state(&self) -> Result<DickeState> {
        let n = self.matrix.nrows();
        let eig = SymmetricEigen::new(self.real_embedding());
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty spectrum");
        let col = eig.eigenvectors.column(k);
        let amps = (0..n).map(|i| C64::new(col[i], col[i + n])).collect();
        DickeState::normalized(self.n_atoms, amps)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, state: &DickeState) -> f64 {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        (v.adjoint() * &self.matrix * &v)[(0, 0)].re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::coherent_state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_state_properties() {
        let s = coherent_state(6, 1.0, 0.5).unwrap();
        let rho = DensityMatrixSym::pure(&s);
        assert_abs_diff_eq!(rho.fidelity_with(&s), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        let ev = rho.eigenvalues();
        assert_abs_diff_eq!(ev[6], 1.0, epsilon = 1e-12);
        let lead = rho.leading_state().unwrap();
        assert_abs_diff_eq!(crate::spin::fidelity(&lead, &s), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let rho = DensityMatrixSym::pure(&coherent_state(3, 0.7, 1.1).unwrap());
        let text = serde_json::to_string(&rho).unwrap();
        assert!(text.starts_with("{\"n_atoms\":3,\"re\":[["));
        let back: DensityMatrixSym = serde_json::from_str(&text).unwrap();
        assert!((back.matrix() - rho.matrix()).iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn rejects_unphysical() {
        let mut m = DMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.0, 0.2);
        assert!(DensityMatrixSym::new(1, m.clone()).is_err());
        m[(1, 0)] = C64::new(0.0, -0.2);
        assert!(DensityMatrixSym::new(1, m).is_ok());
        let neg = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(DensityMatrixSym::new(1, neg).is_err());
    }
}
