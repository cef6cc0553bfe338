//! Small special-function helpers used by the propagators and coherent states.

/// Bessel functions `J_0(x) ..= J_kmax(x)` by Miller's backward recurrence.
///
/// Normalized with `J_0 + 2 Σ J_2k = 1`, which is stable for every `x ≥ 0`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel argument must be finite and non-negative");
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // start well above both kmax and x so the seed error has decayed
    let mut start = kmax.max(x.ceil() as usize) + 40 + (10.0 * x.sqrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0_f64; // J_{k+1}
    let mut cur = 1e-300_f64; // J_k
    let mut norm = 0.0_f64;
    for k in (1..=start).rev() {
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}
        let idx = k - 1;
        if idx <= kmax {
            out[idx] = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += cur; // J_0
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `ln C(n, k)` for all `k = 0..=n`.
pub fn ln_binomial_row(n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    let mut acc = 0.0_f64;
    row.push(0.0);
    for k in 0..n {
        acc += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        row.push(acc);
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        let j = bessel_j_sequence(1.0, 5);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_j_sequence(10.0, 5);
        assert!((j[5] + 0.234_061_528_186_793_6).abs() < 1e-14);
        let j = bessel_j_sequence(100.0, 0);
        assert!((j[0] - 0.019_985_850_304_223_122).abs() < 1e-13);
    }

    #[test]
    fn binomial_row_matches_direct() {
        let row = ln_binomial_row(10);
        assert!((row[3] - 120f64.ln()).abs() < 1e-12);
        assert!((row[10]).abs() < 1e-12);
        let big = ln_binomial_row(1000);
        assert!(big.iter().all(|v| v.is_finite()));
    }
}
