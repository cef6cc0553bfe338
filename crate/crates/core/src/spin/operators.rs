use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};
use crate::C64;

/// Collective spin operators of `N` spin-1/2 particles in the Dicke basis.
///
/// Basis index `k = m + J` runs over `0..=N`. The matrices are tridiagonal
/// (or diagonal), so they are stored by their nonzero bands; dense copies
/// are produced on demand.
#[derive(Debug)]
pub struct SpinOperators {
    n_atoms: usize,
    m: Vec<f64>,
    ladder: Vec<f64>,
    jx_eigen: OnceLock<(Vec<f64>, DMatrix<f64>)>,
}

impl Clone for SpinOperators {
    fn clone(&self) -> Self {
        let jx_eigen = OnceLock::new();
        if let Some(e) = self.jx_eigen.get() {
            let _ = jx_eigen.set(e.clone());
        }
        Self {
            n_atoms: self.n_atoms,
            m: self.m.clone(),
            ladder: self.ladder.clone(),
            jx_eigen,
        }
    }
}

/// Builds the operator set for `n_atoms` particles.
pub fn build_operators(n_atoms: usize) -> Result<SpinOperators> {
    if n_atoms == 0 {
        return invalid("n_atoms must be at least 1");
    }
    let j = n_atoms as f64 / 2.0;
    let m: Vec<f64> = (0..=n_atoms).map(|k| k as f64 - j).collect();
    let ladder = m[..n_atoms]
        .iter()
        .map(|&mk| (j * (j + 1.0) - mk * (mk + 1.0)).max(0.0).sqrt())
        .collect();
    Ok(SpinOperators {
        n_atoms,
        m,
        ladder,
        jx_eigen: OnceLock::new(),
    })
}

impl SpinOperators {
    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn spin_length(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    /// Eigenvalues `m` of `Jz`, ascending.
    pub fn m_values(&self) -> &[f64] {
        &self.m
    }

    /// `√(J(J+1) − m(m+1))` for `m = −J .. J−1`; the raising-operator elements.
    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    pub fn jz(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.m))
    }

    pub fn jx(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for (k, &l) in self.ladder.iter().enumerate() {
            out[(k + 1, k)] = l / 2.0;
            out[(k, k + 1)] = l / 2.0;
        }
        out
    }

    pub fn jy(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for (k, &l) in self.ladder.iter().enumerate() {
            out[(k + 1, k)] = C64::new(0.0, -l / 2.0);
            out[(k, k + 1)] = C64::new(0.0, l / 2.0);
        }
        out
    }

    fn check(&self, psi: &[C64]) {
        assert_eq!(psi.len(), self.dim(), "vector length does not match operator dimension");
    }

    pub fn apply_jz(&self, psi: &[C64]) -> Vec<C64> {
        self.check(psi);
        psi.iter().zip(&self.m).map(|(a, &m)| a * m).collect()
    }

    pub fn apply_jx(&self, psi: &[C64]) -> Vec<C64> {
        self.check(psi);
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for (k, &l) in self.ladder.iter().enumerate() {
            let h = l / 2.0;
            out[k + 1] += psi[k] * h;
            out[k] += psi[k + 1] * h;
        }
        out
    }

    pub fn apply_jy(&self, psi: &[C64]) -> Vec<C64> {
        self.check(psi);
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for (k, &l) in self.ladder.iter().enumerate() {
            let h = l / 2.0;
            out[k + 1] += psi[k] * C64::new(0.0, -h);
            out[k] += psi[k + 1] * C64::new(0.0, h);
        }
        out
    }

    /// Cached eigendecomposition `Jx = V diag(λ) Vᵀ`.
    pub(crate) fn jx_eigen(&self) -> &(Vec<f64>, DMatrix<f64>) {
        self.jx_eigen.get_or_init(|| {
            let eig = SymmetricEigen::new(self.jx());
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        })
    }

    /// `exp(−i·angle·Jz) ψ`.
    pub fn rotate_z(&self, psi: &[C64], angle: f64) -> Vec<C64> {
        self.check(psi);
        psi.iter()
            .zip(&self.m)
            .map(|(a, &m)| a * C64::from_polar(1.0, -angle * m))
            .collect()
    }

    /// `exp(−i·angle·Jx) ψ`.
    pub fn rotate_x(&self, psi: &[C64], angle: f64) -> Vec<C64> {
        self.check(psi);
        let (lambda, v) = self.jx_eigen();
        let d = self.dim();
        let mut coeff = vec![C64::new(0.0, 0.0); d];
        for (c, col) in coeff.iter_mut().zip(v.column_iter()) {
            let mut acc = C64::new(0.0, 0.0);
            for (x, a) in col.iter().zip(psi) {
                acc += a * *x;
            }
            *c = acc;
        }
        for (c, &l) in coeff.iter_mut().zip(lambda) {
            *c *= C64::from_polar(1.0, -angle * l);
        }
        let mut out = vec![C64::new(0.0, 0.0); d];
        for (c, col) in coeff.iter().zip(v.column_iter()) {
            for (o, x) in out.iter_mut().zip(col.iter()) {
                *o += c * *x;
            }
        }
        out
    }

    /// `exp(−i·angle·(cos φ Jx + sin φ Jy)) ψ` for an equatorial axis at azimuth `axis_phase`.
    pub fn rotate_equatorial(&self, psi: &[C64], axis_phase: f64, angle: f64) -> Vec<C64> {
        let a = self.rotate_z(psi, -axis_phase);
        let b = self.rotate_x(&a, angle);
        self.rotate_z(&b, axis_phase)
    }

    /// `exp(−i·angle·Jy) ψ`.
    pub fn rotate_y(&self, psi: &[C64], angle: f64) -> Vec<C64> {
        self.rotate_equatorial(psi, std::f64::consts::FRAC_PI_2, angle)
    }

    /// `⟨ψ|Jx|ψ⟩, ⟨ψ|Jy|ψ⟩, ⟨ψ|Jz|ψ⟩`.
    pub fn expectations(&self, psi: &[C64]) -> [f64; 3] {
        self.check(psi);
        let mut ex = 0.0;
        let mut ey = 0.0;
        for (k, &l) in self.ladder.iter().enumerate() {
            // ⟨k+1|ψ⟩* ⟨k|ψ⟩ carries both Jx and Jy
            let c = psi[k + 1].conj() * psi[k];
            ex += l * c.re;
            ey += l * c.im;
        }
        let ez = psi.iter().zip(&self.m).map(|(a, &m)| a.norm_sqr() * m).sum();
        [ex, ey, ez]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
        m.map(|x| C64::new(x, 0.0))
    }

    #[test]
    fn rejects_zero_atoms() {
        assert!(build_operators(0).is_err());
    }

    #[test]
    fn spin_one_elements() {
        let ops = build_operators(2).unwrap();
        let jx = ops.jx();
        assert_abs_diff_eq!(jx[(1, 0)], 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(jx[(2, 1)], 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(ops.m_values(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let ops = build_operators(1).unwrap();
        let jx = ops.jx();
        let jy = ops.jy();
        let jz = ops.jz();
        assert_abs_diff_eq!(jx[(0, 1)], 0.5);
        assert_abs_diff_eq!(jx[(0, 0)], 0.0);
        assert_abs_diff_eq!(jy[(0, 1)].im, 0.5);
        assert_abs_diff_eq!(jy[(1, 0)].im, -0.5);
        assert_abs_diff_eq!(jz[(0, 0)], -0.5);
        assert_abs_diff_eq!(jz[(1, 1)], 0.5);
    }

    #[test]
    fn commutator_closes() {
        for n in [1, 2, 5, 12, 31] {
            let ops = build_operators(n).unwrap();
            let jx = to_complex(&ops.jx());
            let jy = ops.jy();
            let jz = to_complex(&ops.jz());
            let comm = &jx * &jy - &jy * &jx - jz * C64::new(0.0, 1.0);
            let scale = (n as f64).powi(2).max(1.0);
            assert!(comm.iter().all(|c| c.norm() / scale < 1e-10));
        }
    }

    #[test]
    fn banded_apply_matches_dense() {
        let ops = build_operators(7).unwrap();
        let psi: Vec<C64> = (0..8).map(|k| C64::new(k as f64 * 0.3, 1.0 - k as f64 * 0.1)).collect();
        let v = nalgebra::DVector::from_column_slice(&psi);
        let dense_y = ops.jy() * &v;
        let dense_x = to_complex(&ops.jx()) * &v;
        for (a, b) in ops.apply_jy(&psi).iter().zip(dense_y.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
        for (a, b) in ops.apply_jx(&psi).iter().zip(dense_x.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_about_y_maps_south_pole_to_x() {
        let ops = build_operators(10).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); 11];
        psi[0] = C64::new(1.0, 0.0);
        let r = ops.rotate_y(&psi, std::f64::consts::FRAC_PI_2);
        let e = ops.expectations(&r);
        // right-handed rotation by +π/2 about y takes −z to −x
        assert_abs_diff_eq!(e[0], -5.0, epsilon = 1e-10);
        assert_abs_diff_eq!(e[1], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(e[2], 0.0, epsilon = 1e-10);
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn state(n: usize) -> impl Strategy<Value = Vec<C64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n + 1).prop_map(|v| {
            let a: Vec<C64> = v.into_iter().map(|(r, i)| C64::new(r, i)).collect();
            let norm = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
            a.into_iter().map(|x| x / norm).collect()
        })
    }

    proptest! {
        #[test]
        fn rotations_compose_and_preserve_norm(psi in state(9), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let ops = build_operators(9).unwrap();
            for rot in [SpinOperators::rotate_x, SpinOperators::rotate_y, SpinOperators::rotate_z] {
                let two = rot(&ops, &rot(&ops, &psi, a), b);
                let one = rot(&ops, &psi, a + b);
                for (x, y) in two.iter().zip(&one) {
                    prop_assert!((x - y).norm() < 1e-10);
                }
                let norm: f64 = one.iter().map(|x| x.norm_sqr()).sum();
                prop_assert!((norm - 1.0).abs() < 1e-10);
            }
        }
    }
}
