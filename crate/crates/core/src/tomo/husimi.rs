use std::f64::consts::PI;
use std::fmt::Write as _;

use super::DensityMatrixSym;
use crate::spin::coherent_state;
use crate::C64;

/// Points along each axis of the Husimi grid.
pub const HUSIMI_GRID: usize = 255;

/// `⟨ϑ,φ|ρ|ϑ,φ⟩` over the sphere, scaled so its maximum is one.
#[derive(Debug, Clone, PartialEq)]
pub struct HusimiMap {
    /// Azimuths `2πi/255`, periodic.
    pub phis: Vec<f64>,
    /// Polar angles `πj/254`, both poles included.
    pub thetas: Vec<f64>,
    /// `values[i][j]` at `(phis[i], thetas[j])`.
    pub values: Vec<Vec<f64>>,
}

impl HusimiMap {
    /// Grid point `(φ, ϑ)` of the largest value.
    pub fn argmax(&self) -> (f64, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        (self.phis[best.0], self.thetas[best.1])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,theta,value\n");
        for (phi, row) in self.phis.iter().zip(&self.values) {
            for (theta, v) in self.thetas.iter().zip(row) {
                writeln!(out, "{phi},{theta},{v}").expect("writing to a String");
            }
        }
        out
    }
}

pub fn husimi(rho: &DensityMatrixSym) -> HusimiMap {
    let n = rho.n_atoms();
    let d = n + 1;
    let m = rho.matrix();
    let phis: Vec<f64> = (0..HUSIMI_GRID).map(|i| 2.0 * PI * i as f64 / HUSIMI_GRID as f64).collect();
    let thetas: Vec<f64> = (0..HUSIMI_GRID).map(|j| PI * j as f64 / (HUSIMI_GRID - 1) as f64).collect();
    let mut values = vec![vec![0.0; HUSIMI_GRID]; HUSIMI_GRID];
    for (j, &theta) in thetas.iter().enumerate() {
        let a: Vec<f64> = coherent_state(n, theta, 0.0)
            .expect("polar angle on grid")
            .amplitudes()
            .iter()
            .map(|c| c.re)
            .collect();
        // diagonal sums S_δ = Σ_{k−l=δ} a_k a_l ρ_kl for δ ≥ 0
        let sums: Vec<C64> = (0..d)
            .map(|delta| (delta..d).map(|k| m[(k, k - delta)] * (a[k] * a[k - delta])).sum())
            .collect();
        for (i, &phi) in phis.iter().enumerate() {
            let mut q = sums[0].re;
            for (delta, s) in sums.iter().enumerate().skip(1) {
                q += 2.0 * (C64::from_polar(1.0, delta as f64 * phi) * s).re;
            }
            values[i][j] = q.max(0.0);
        }
    }
    let max = values.iter().flatten().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for v in values.iter_mut().flatten() {
            *v /= max;
        }
    }
    HusimiMap { phis, thetas, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{fidelity, DickeState};

    #[test]
    fn peaks_at_coherent_direction() {
        let (i0, j0) = (40usize, 100usize);
        let phi0 = 2.0 * PI * i0 as f64 / 255.0 + 0.004;
        let theta0 = PI * j0 as f64 / 254.0 - 0.003;
        let psi = coherent_state(30, theta0, phi0).unwrap();
        let map = husimi(&DensityMatrixSym::pure(&psi));
        let (phi, theta) = map.argmax();
        assert!((phi - map.phis[i0]).abs() < 1e-12 && (theta - map.thetas[j0]).abs() < 1e-12);
        let v = map.values.iter().flatten();
        assert!(v.clone().all(|x| (0.0..=1.0).contains(x)));
        assert_eq!(v.copied().fold(0.0, f64::max), 1.0);
        // direct overlap agrees with the fast evaluation
        let probe = coherent_state(30, map.thetas[90], map.phis[50]).unwrap();
        let direct = fidelity(&probe, &psi) / fidelity(&coherent_state(30, map.thetas[j0], map.phis[i0]).unwrap(), &psi);
        assert!((map.values[50][90] - direct).abs() < 1e-10);
    }

    #[test]
    fn top_state_at_pole() {
        let map = husimi(&DensityMatrixSym::pure(&DickeState::basis(8, 8).unwrap()));
        assert_eq!(map.argmax().1, PI);
        assert!(map.values.iter().all(|row| row[254] == 1.0));
        let csv = map.to_csv();
        assert_eq!(csv.lines().count(), 1 + 255 * 255);
    }
}
