use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BinGrid, ProbabilityDistribution, Rebin, Setting};
use crate::error::{invalid, Error, Result};

/// Histogram of sampled outcomes with exact integer counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    setting: Setting,
    grid: BinGrid,
    counts: Vec<u64>,
    /// Bins with nonzero underlying probability, when known.
    pub n_support_nonzero: Option<usize>,
}

impl EmpiricalDistribution {
    pub fn new(setting: Setting, grid: BinGrid, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != grid.len {
            return Err(Error::DimensionMismatch {
                expected: grid.len,
                got: counts.len(),
            });
        }
        Ok(Self {
            setting,
            grid,
            counts,
            n_support_nonzero: None,
        })
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn bin_width(&self) -> f64 {
        self.grid.width()
    }

    pub fn support(&self) -> Vec<f64> {
        self.grid.centers()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `M = Σ counts`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `counts / total`; all zeros when empty.
    pub fn freqs(&self) -> Vec<f64> {
        let m = self.total();
        if m == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| c as f64 / m as f64).collect()
    }

    /// Frequencies viewed as a distribution on the same grid.
    pub fn to_distribution(&self) -> Result<ProbabilityDistribution> {
        if self.total() == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(ProbabilityDistribution::from_parts_unchecked(
            self.setting,
            self.grid,
            self.freqs(),
        ))
    }

    pub fn mean_z(&self) -> f64 {
        self.freqs().iter().enumerate().map(|(k, f)| f * self.grid.center(k)).sum()
    }

    pub fn var_z(&self) -> f64 {
        let mean = self.mean_z();
        self.freqs()
            .iter()
            .enumerate()
            .map(|(k, f)| f * (self.grid.center(k) - mean).powi(2))
            .sum()
    }
}

impl Rebin for EmpiricalDistribution {
    fn rebin(&self, new_width: f64) -> Result<Self> {
        let r = self.grid.ratio_for(new_width)?;
        let counts = self.counts.chunks(r).map(|c| c.iter().sum()).collect();
        Ok(Self {
            setting: self.setting,
            grid: self.grid.coarsened(r),
            counts,
            n_support_nonzero: None,
        })
    }
}

/// Raw per-realization outcomes, stored as bin indices on `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    pub setting: Setting,
    pub grid: BinGrid,
    pub outcomes: Vec<u32>,
}

impl Draws {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn histogram(&self) -> EmpiricalDistribution {
        let mut counts = vec![0u64; self.grid.len];
        for &o in &self.outcomes {
            counts[o as usize] += 1;
        }
        EmpiricalDistribution {
            setting: self.setting,
            grid: self.grid,
            counts,
            n_support_nonzero: None,
        }
    }

    /// Outcomes as imbalance values.
    pub fn z_values(&self) -> Vec<f64> {
        self.outcomes.iter().map(|&o| self.grid.center(o as usize)).collect()
    }

    /// First `at` draws and the remainder.
    pub fn split_at(&self, at: usize) -> (Draws, Draws) {
        let at = at.min(self.outcomes.len());
        let (a, b) = self.outcomes.split_at(at);
        (
            Draws {
                outcomes: a.to_vec(),
                ..self.clone_empty()
            },
            Draws {
                outcomes: b.to_vec(),
                ..self.clone_empty()
            },
        )
    }

    fn clone_empty(&self) -> Draws {
        Draws {
            setting: self.setting,
            grid: self.grid,
            outcomes: Vec::new(),
        }
    }
}

impl Rebin for Draws {
    fn rebin(&self, new_width: f64) -> Result<Self> {
        let r = self.grid.ratio_for(new_width)? as u32;
        Ok(Draws {
            setting: self.setting,
            grid: self.grid.coarsened(r as usize),
            outcomes: self.outcomes.iter().map(|&o| o / r).collect(),
        })
    }
}

/// `m_draws` independent outcomes from `dist`.
pub fn sample_draws<R: Rng + ?Sized>(dist: &ProbabilityDistribution, m_draws: usize, rng: &mut R) -> Result<Draws> {
    if m_draws == 0 {
        return invalid("number of draws must be positive");
    }
    let index = WeightedIndex::new(dist.probs()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let outcomes = (0..m_draws).map(|_| index.sample(rng) as u32).collect();
    Ok(Draws {
        setting: dist.setting(),
        grid: *dist.grid(),
        outcomes,
    })
}

/// Multinomial histogram of `m_draws` outcomes, reproducible per `seed`.
pub fn sample(dist: &ProbabilityDistribution, m_draws: usize, seed: u64) -> Result<EmpiricalDistribution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = sample_draws(dist, m_draws, &mut rng)?.histogram();
    hist.n_support_nonzero = Some(dist.occupied());
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: Vec<f64>) -> ProbabilityDistribution {
        let n = p.len() - 1;
        ProbabilityDistribution::new(Setting::default(), BinGrid::native(n), p).unwrap()
    }

    #[test]
    fn point_mass_fills_one_bin() {
        let e = sample(&dist(vec![0.0, 1.0, 0.0]), 100, 3).unwrap();
        assert_eq!(e.counts(), &[0, 100, 0]);
        assert_eq!(e.n_support_nonzero, Some(1));
    }

    #[test]
    fn fair_coin_frequency() {
        let e = sample(&dist(vec![0.5, 0.5]), 1_000_000, 11).unwrap();
        let f = e.freqs();
        assert!((f[0] - 0.5).abs() < 0.002);
        assert_eq!(f.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn reproducible_per_seed() {
        let d = dist(vec![0.2, 0.3, 0.5]);
        assert_eq!(sample(&d, 500, 7).unwrap(), sample(&d, 500, 7).unwrap());
        assert_ne!(sample(&d, 500, 7).unwrap(), sample(&d, 500, 8).unwrap());
        assert!(sample(&d, 0, 1).is_err());
    }

    #[test]
    fn draws_rebin_like_histograms() {
        let d = dist(vec![0.1, 0.2, 0.3, 0.25, 0.15]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = sample_draws(&d, 300, &mut rng).unwrap();
        let w = 2.0 * d.bin_width();
        assert_eq!(draws.rebin(w).unwrap().histogram(), draws.histogram().rebin(w).unwrap());
    }
}
