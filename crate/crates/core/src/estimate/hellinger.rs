use crate::error::Result;
use crate::measure::ProbabilityDistribution;

/// `Σ √(p q)` over paired entries.
pub fn bhattacharyya(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum()
}

/// `½ Σ (√p − √q)²` over paired entries, clamped to `[0, 1]`.
pub fn hellinger_squared_values(p: &[f64], q: &[f64]) -> f64 {
    let d: f64 = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    (0.5 * d).clamp(0.0, 1.0)
}

/// Squared Hellinger distance between distributions on aligned grids.
///
/// Bins present in only one grid count as zero probability in the other.
pub fn hellinger_squared(p: &ProbabilityDistribution, q: &ProbabilityDistribution) -> Result<f64> {
    if p.grid() == q.grid() {
        return Ok(hellinger_squared_values(p.probs(), q.probs()));
    }
    let u = p.grid().union(q.grid())?;
    let (a, b) = (p.on_grid(&u)?, q.on_grid(&u)?);
    Ok(hellinger_squared_values(a.probs(), b.probs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{BinGrid, Setting};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dist(p: Vec<f64>) -> ProbabilityDistribution {
        let n = p.len() - 1;
        ProbabilityDistribution::new(Setting::default(), BinGrid::native(n), p).unwrap()
    }

    #[test]
    fn identical_and_disjoint() {
        let p = dist(vec![0.2, 0.8, 0.0]);
        assert_eq!(hellinger_squared(&p, &p).unwrap(), 0.0);
        let q = dist(vec![0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(hellinger_squared(&p, &q).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn hand_value() {
        let v = hellinger_squared_values(&[0.5, 0.5], &[1.0, 0.0]);
        assert_abs_diff_eq!(v, 1.0 - 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn mismatched_binning_rejected() {
        let p = dist(vec![0.5, 0.5, 0.0, 0.0, 0.0]);
        let q = ProbabilityDistribution::new(
            Setting::default(),
            BinGrid { factor: 2, len: 3, ..BinGrid::native(4) },
            vec![0.5, 0.5, 0.0],
        )
        .unwrap();
        assert!(hellinger_squared(&p, &q).is_err());
    }

    fn normalized(v: Vec<f64>) -> Vec<f64> {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    fn prob_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.001f64..1.0, n).prop_map(normalized)
    }

    proptest! {
        #[test]
        fn forms_agree(p in prob_vec(12), q in prob_vec(12)) {
            let a = hellinger_squared_values(&p, &q);
            let b = 1.0 - bhattacharyya(&p, &q);
            prop_assert!((a - b).abs() < 1e-14);
        }

        #[test]
        fn symmetric(p in prob_vec(9), q in prob_vec(9)) {
            prop_assert_eq!(hellinger_squared_values(&p, &q), hellinger_squared_values(&q, &p));
        }

        #[test]
        fn triangle(p in prob_vec(7), q in prob_vec(7), r in prob_vec(7)) {
            let d = |a: &[f64], b: &[f64]| hellinger_squared_values(a, b).sqrt();
            prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12);
        }
    }
}
