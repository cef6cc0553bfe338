/// Predicted offset `c₀ = (n−1)/4M` and quadratic bias `c₂ ≈ F(1+n)/32M`
/// of the sampled squared Hellinger distance.
pub fn bias_terms(n_occupied: usize, m: usize, fisher: f64) -> (f64, f64) {
    let n = n_occupied as f64;
    let m = m as f64;
    ((n - 1.0).max(0.0) / (4.0 * m), fisher * (1.0 + n) / (32.0 * m))
}

/// `c₂ = [F + Σ_z (∂_θ log P_z)²] / 32M` summed over bins with `P_z > 1/(M+1)`.
pub fn c2_from_family(probs: &[f64], dprobs: &[f64], m: usize) -> f64 {
    let floor = 1.0 / (m as f64 + 1.0);
    let mut fisher = 0.0;
    let mut score2 = 0.0;
    for (p, d) in probs.iter().zip(dprobs) {
        if *p > 1e-300 {
            fisher += d * d / p;
        }
        if *p > floor {
            score2 += (d / p).powi(2);
        }
    }
    (fisher + score2) / (32.0 * m as f64)
}

/// Leading-order variance `Fθ²/8M` of the sampled squared Hellinger distance.
pub fn hellinger_variance_prediction(fisher: f64, m: usize, theta: f64) -> f64 {
    fisher * theta * theta / (8.0 * m as f64)
}
