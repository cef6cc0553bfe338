//! Text formats for histograms, raw draws and their metadata.

use serde::{Deserialize, Serialize};

use super::{BinGrid, Draws, EmpiricalDistribution, ProbabilityDistribution, Setting};
use crate::error::{Error, Result};

/// JSON sidecar accompanying every histogram file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramMeta {
    pub n_atoms: usize,
    pub alpha_deg: f64,
    pub theta_deg: f64,
    pub bin_width: f64,
    pub seed: Option<u64>,
}

impl HistogramMeta {
    pub fn new(grid: &BinGrid, setting: Setting, seed: Option<u64>) -> Self {
        Self {
            n_atoms: grid.n_atoms,
            alpha_deg: setting.alpha.to_degrees(),
            theta_deg: setting.theta.to_degrees(),
            bin_width: grid.width(),
            seed,
        }
    }

    pub fn setting(&self) -> Setting {
        Setting::new(self.alpha_deg.to_radians(), self.theta_deg.to_radians())
    }
}

/// `z,count` CSV with one row per bin.
pub fn histogram_csv(hist: &EmpiricalDistribution) -> String {
    let mut out = String::from("z,count\n");
    for (z, c) in hist.support().iter().zip(hist.counts()) {
        out.push_str(&format!("{z},{c}\n"));
    }
    out
}

/// `z,probability` CSV of an exact distribution.
pub fn probability_csv(dist: &ProbabilityDistribution) -> String {
    let mut out = String::from("z,probability\n");
    for (z, p) in dist.support().iter().zip(dist.probs()) {
        out.push_str(&format!("{z},{p:e}\n"));
    }
    out
}

/// Single-column `z` listing of raw outcomes in draw order.
pub fn draws_csv(draws: &Draws) -> String {
    let mut out = String::from("z\n");
    for z in draws.z_values() {
        out.push_str(&format!("{z}\n"));
    }
    out
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => Ok(lines),
        _ => Err(Error::Parse(format!("expected header `{header}`"))),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {}: bad number `{s}`", line + 1)))
}

/// Parses a `z,count` file; the grid is rebuilt from `meta`.
pub fn parse_histogram(text: &str, meta: &HistogramMeta) -> Result<EmpiricalDistribution> {
    let mut zs = Vec::new();
    let mut counts = Vec::new();
    for (i, line) in rows(text, "z,count")? {
        let (z, c) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", i + 1)))?;
        zs.push(parse_f64(z, i)?);
        counts.push(
            c.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("line {}: bad count `{c}`", i + 1)))?,
        );
    }
    if zs.is_empty() {
        return Err(Error::Parse("histogram has no rows".into()));
    }
    let grid = BinGrid::from_first_center(meta.n_atoms, meta.bin_width, zs[0], zs.len())?;
    for (k, z) in zs.iter().enumerate() {
        if (grid.center(k) - z).abs() > 1e-9 {
            return Err(Error::BinningMismatch(format!("row {k}: z = {z} is not on a uniform grid")));
        }
    }
    EmpiricalDistribution::new(meta.setting(), grid, counts)
}

/// Parses a `z` listing onto `grid`.
pub fn parse_draws(text: &str, grid: &BinGrid, setting: Setting) -> Result<Draws> {
    let mut outcomes = Vec::new();
    for (i, line) in rows(text, "z")? {
        let z = parse_f64(line, i)?;
        let k = grid
            .bin_of_z(z)
            .ok_or_else(|| Error::BinningMismatch(format!("line {}: z = {z} is off the grid", i + 1)))?;
        outcomes.push(k as u32);
    }
    Ok(Draws {
        setting,
        grid: *grid,
        outcomes,
    })
}
