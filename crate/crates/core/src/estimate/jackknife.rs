use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::Draws;

/// Block sizes used for the delete-one-block Jackknife.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JackknifeConfig {
    /// Block sizes `h` of the smaller sample; `None` means the divisors of `M` up to `max_block`.
    pub block_sizes: Option<Vec<usize>>,
    pub max_block: usize,
}

impl Default for JackknifeConfig {
    fn default() -> Self {
        Self {
            block_sizes: None,
            max_block: 20,
        }
    }
}

impl JackknifeConfig {
    pub fn fixed(block_sizes: Vec<usize>) -> Self {
        Self {
            block_sizes: Some(block_sizes),
            max_block: 20,
        }
    }

    /// Block sizes applied to a sample of `m` draws.
    pub fn blocks_for(&self, m: usize) -> Vec<usize> {
        match &self.block_sizes {
            Some(v) => v.clone(),
            None => (1..=self.max_block.min(m)).filter(|h| m % h == 0).collect(),
        }
    }
}

/// Jackknife estimate averaged over block sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeResult {
    /// Bias-corrected estimate.
    pub estimate: f64,
    /// Standard error from the spread of the leave-one-block-out values.
    pub std_error: f64,
    /// Plug-in estimate on the full samples.
    pub raw: f64,
    /// Block sizes that were used.
    pub blocks: Vec<usize>,
}

struct Single {
    corrected: f64,
    variance: f64,
}

fn combine(full: f64, partial: &[f64]) -> Single {
    let g = partial.len() as f64;
    let sum: f64 = partial.iter().sum();
    let mean = sum / g;
    let var = (g - 1.0) / g * partial.iter().map(|d| (d - mean).powi(2)).sum::<f64>();
    Single {
        corrected: g * full - (g - 1.0) / g * sum,
        variance: var,
    }
}

fn average(full: f64, runs: Vec<(usize, Single)>) -> Result<JackknifeResult> {
    if runs.is_empty() {
        return invalid("no usable block size");
    }
    let k = runs.len() as f64;
    let estimate = runs.iter().map(|(_, s)| s.corrected).sum::<f64>() / k;
    let variance = runs.iter().map(|(_, s)| s.variance).sum::<f64>() / k;
    Ok(JackknifeResult {
        estimate,
        std_error: variance.sqrt(),
        raw: full,
        blocks: runs.into_iter().map(|(h, _)| h).collect(),
    })
}

/// Delete-one-block Jackknife of a statistic of one sample.
pub fn block_jackknife<T: Clone>(
    data: &[T],
    config: &JackknifeConfig,
    statistic: impl Fn(&[T]) -> f64,
) -> Result<JackknifeResult> {
    let m = data.len();
    if m < 2 {
        return invalid("Jackknife needs at least two samples");
    }
    let full = statistic(data);
    let mut runs = Vec::new();
    for h in config.blocks_for(m) {
        if h == 0 || m % h != 0 || m / h < 2 {
            log::warn!("skipping Jackknife block size {h} for {m} samples");
            continue;
        }
        let g = m / h;
        let mut rest = Vec::with_capacity(m - h);
        let partial: Vec<f64> = (0..g)
            .map(|i| {
                rest.clear();
                rest.extend_from_slice(&data[..i * h]);
                rest.extend_from_slice(&data[(i + 1) * h..]);
                statistic(&rest)
            })
            .collect();
        runs.push((h, combine(full, &partial)));
    }
    average(full, runs)
}

fn counts(outcomes: &[u32], len: usize) -> Vec<u64> {
    let mut c = vec![0u64; len];
    for &o in outcomes {
        c[o as usize] += 1;
    }
    c
}

fn hellinger_counts(a: &[u64], ma: u64, b: &[u64], mb: u64) -> f64 {
    let bc: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| ((x * y) as f64).sqrt())
        .sum::<f64>()
        / ((ma * mb) as f64).sqrt();
    (1.0 - bc).clamp(0.0, 1.0)
}

/// Bias-corrected squared Hellinger distance between two raw samples.
///
/// Block size `h` applies to the smaller sample; both samples are cut into
/// the same number of groups `g = M_small/h` and group `i` is removed from
/// both at once. Block sizes that do not divide both samples are skipped.
pub fn jackknife_hellinger(s0: &Draws, s1: &Draws, config: &JackknifeConfig) -> Result<JackknifeResult> {
    if s0.grid != s1.grid {
        return Err(Error::BinningMismatch("Jackknife samples use different grids".into()));
    }
    let (m0, m1) = (s0.len(), s1.len());
    if m0 < 2 || m1 < 2 {
        return invalid("Jackknife needs at least two draws per sample");
    }
    let len = s0.grid.len;
    let c0 = counts(&s0.outcomes, len);
    let c1 = counts(&s1.outcomes, len);
    let full = hellinger_counts(&c0, m0 as u64, &c1, m1 as u64);
    let small = m0.min(m1);
    let mut runs = Vec::new();
    for h in config.blocks_for(small) {
        if h == 0 || small % h != 0 {
            log::warn!("skipping Jackknife block size {h}: does not divide {small}");
            continue;
        }
        let g = small / h;
        if g < 2 || m0 % g != 0 || m1 % g != 0 {
            log::warn!("skipping Jackknife block size {h}: {g} groups do not split {m0} and {m1}");
            continue;
        }
        let (b0, b1) = (m0 / g, m1 / g);
        let partial: Vec<f64> = (0..g)
            .map(|i| {
                let r0 = counts(&s0.outcomes[i * b0..(i + 1) * b0], len);
                let r1 = counts(&s1.outcomes[i * b1..(i + 1) * b1], len);
                let a: Vec<u64> = c0.iter().zip(&r0).map(|(c, r)| c - r).collect();
                let b: Vec<u64> = c1.iter().zip(&r1).map(|(c, r)| c - r).collect();
                hellinger_counts(&a, (m0 - b0) as u64, &b, (m1 - b1) as u64)
            })
            .collect();
        runs.push((h, combine(full, &partial)));
    }
    average(full, runs)
}
