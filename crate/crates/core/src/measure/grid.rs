use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid of imbalance bins built from groups of native Dicke levels.
///
/// Bin `k` collects the `factor` native levels starting at native index
/// `first + k·factor`; native index `i` sits at `z = (2i − N)/N`. Native
/// indices outside `0..=N` arise from noise convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinGrid {
    pub n_atoms: usize,
    pub factor: usize,
    pub first: i64,
    pub len: usize,
}

impl BinGrid {
    /// One bin per Dicke level, width `2/N`.
    pub fn native(n_atoms: usize) -> Self {
        Self {
            n_atoms,
            factor: 1,
            first: 0,
            len: n_atoms + 1,
        }
    }

    pub fn width(&self) -> f64 {
        2.0 * self.factor as f64 / self.n_atoms as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        let start = self.first + (k * self.factor) as i64;
        (2 * start + self.factor as i64 - 1 - self.n_atoms as i64) as f64 / self.n_atoms as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.center(k)).collect()
    }

    /// Native index where bin `k` starts.
    pub fn native_start(&self, k: usize) -> i64 {
        self.first + (k * self.factor) as i64
    }

    /// Bin holding native index `i`, if inside the grid.
    pub fn bin_of_native(&self, i: i64) -> Option<usize> {
        let off = i - self.first;
        if off < 0 {
            return None;
        }
        let k = (off / self.factor as i64) as usize;
        (k < self.len).then_some(k)
    }

    /// Bin whose center is nearest to `z`, if inside the grid.
    pub fn bin_of_z(&self, z: f64) -> Option<usize> {
        let n = self.n_atoms as f64;
        let k = ((z * n + n + 1.0 - self.factor as f64) / 2.0 - self.first as f64) / self.factor as f64;
        let r = k.round();
        if (k - r).abs() > 1e-6 || r < 0.0 || r as usize >= self.len {
            return None;
        }
        Some(r as usize)
    }

    /// Whether bins of both grids coincide where they overlap.
    pub fn is_aligned_with(&self, other: &BinGrid) -> bool {
        self.n_atoms == other.n_atoms
            && self.factor == other.factor
            && (self.first - other.first).rem_euclid(self.factor as i64) == 0
    }

    /// Smallest aligned grid covering both.
    pub fn union(&self, other: &BinGrid) -> Result<BinGrid> {
        if !self.is_aligned_with(other) {
            return Err(Error::BinningMismatch(format!("{self:?} vs {other:?}")));
        }
        let first = self.first.min(other.first);
        let end = self.native_start(self.len).max(other.native_start(other.len));
        Ok(BinGrid {
            first,
            len: ((end - first) / self.factor as i64) as usize,
            ..*self
        })
    }

    /// Offset of `self`'s bin 0 inside the aligned grid `outer`.
    pub fn offset_in(&self, outer: &BinGrid) -> usize {
        ((self.first - outer.first) / self.factor as i64) as usize
    }

    /// Grid obtained by merging `ratio` consecutive bins.
    pub fn coarsened(&self, ratio: usize) -> BinGrid {
        BinGrid {
            factor: self.factor * ratio,
            len: self.len.div_ceil(ratio),
            ..*self
        }
    }

    /// Integer ratio between `new_width` and the current width.
    pub fn ratio_for(&self, new_width: f64) -> Result<usize> {
        let ratio = new_width / self.width();
        let r = ratio.round();
        if !(r >= 1.0) || (ratio - r).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::NonCommensurate {
                requested: new_width,
                native: self.width(),
            });
        }
        Ok(r as usize)
    }

    /// Reconstructs a grid from its bin width and first center.
    pub fn from_first_center(n_atoms: usize, width: f64, first_center: f64, len: usize) -> Result<BinGrid> {
        let n = n_atoms as f64;
        let f = width * n / 2.0;
        let factor = f.round();
        if !(factor >= 1.0) || (f - factor).abs() > 1e-6 {
            return Err(Error::NonCommensurate {
                requested: width,
                native: 2.0 / n,
            });
        }
        let first = (first_center * n + n + 1.0 - factor) / 2.0;
        let fr = first.round();
        if (first - fr).abs() > 1e-6 {
            return Err(Error::BinningMismatch(format!("bin center {first_center} is off the native lattice")));
        }
        Ok(BinGrid {
            n_atoms,
            factor: factor as usize,
            first: fr as i64,
            len,
        })
    }
}
