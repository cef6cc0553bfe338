use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::Serialize;

use super::config::AnalysisConfig;
use super::files::{rng_for, write_atomic};
use crate::error::{invalid, Error, Result};
use crate::estimate::{
    bayesian_estimate, hellinger_fisher, moment_sensitivity, spin_squeezing, FitPoint, FitSummary, MomentSensitivity,
    SqueezingResult,
};
use crate::measure::io::{parse_draws, parse_histogram, HistogramMeta};
use crate::measure::{Draws, EmpiricalDistribution, Rebin};
use crate::tomo::{husimi, mle_reconstruct, MleOptions};

const ANGLE_TOL: f64 = 1e-9;

struct Record {
    meta: HistogramMeta,
    hist: EmpiricalDistribution,
    draws: Option<Draws>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JackknifeEntry {
    pub theta_deg: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub raw: f64,
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub cubic: bool,
    pub fisher_prime: Option<f64>,
    pub summary: Option<FitSummary>,
    pub points: Vec<FitPointDeg>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitPointDeg {
    pub theta_deg: f64,
    pub d2: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesSummary {
    pub holdout: usize,
    pub sequence_length: usize,
    pub sequences: usize,
    pub concave: usize,
    pub mean_sigma2: Option<f64>,
    pub mean_theta_center_deg: Option<f64>,
    /// `⟨σ²⟩·m·F`, one at the Cramér-Rao bound.
    pub sigma2_m_fisher: Option<f64>,
    pub discarded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographySummary {
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub underdetermined: bool,
    pub polished: bool,
    pub purity: f64,
}

/// Results document, field order fixed for byte-stable output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub n_atoms: usize,
    pub alpha_deg: f64,
    pub bin_width: f64,
    pub fisher: f64,
    pub fisher_per_atom: f64,
    pub std_error: f64,
    pub ci68: [f64; 2],
    pub entangled: bool,
    pub fit: FitReport,
    pub c0_predicted: f64,
    pub jackknife: Vec<JackknifeEntry>,
    pub bayes: Option<BayesSummary>,
    pub squeezing: Option<SqueezingResult>,
    pub moments: Option<MomentSensitivity>,
    pub tomography: Option<TomographySummary>,
}

fn is_data_csv(p: &Path) -> bool {
    let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    name.ends_with(".csv") && !name.ends_with(".prob.csv") && !name.ends_with(".draws.csv") && !name.starts_with('.')
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", dir.display())))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    v.sort();
    Ok(v)
}

fn load_dataset(dir: &Path) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for csv in sorted_entries(dir)?.into_iter().filter(|p| is_data_csv(p)) {
        let side = csv.with_extension("json");
        if !side.exists() {
            continue;
        }
        let meta: HistogramMeta = serde_json::from_str(&std::fs::read_to_string(&side)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", side.display())))?;
        let hist = parse_histogram(&std::fs::read_to_string(&csv)?, &meta)
            .map_err(|e| Error::Parse(format!("{}: {e}", csv.display())))?;
        let draws_path = csv.with_extension("draws.csv");
        let draws = if draws_path.exists() {
            Some(parse_draws(&std::fs::read_to_string(&draws_path)?, hist.grid(), hist.setting())?)
        } else {
            None
        };
        out.push(Record { meta, hist, draws });
    }
    Ok(out)
}

/// Outcomes of a histogram in a reproducible pseudo-random order.
fn expand(record: &Record, seed: u64) -> Draws {
    if let Some(d) = &record.draws {
        return d.clone();
    }
    let mut outcomes: Vec<u32> = record
        .hist
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat_n(k as u32, c as usize))
        .collect();
    let label = format!("order;alpha={:.6};theta={:.6}", record.meta.alpha_deg, record.meta.theta_deg);
    outcomes.shuffle(&mut rng_for(seed, &label));
    Draws {
        setting: record.hist.setting(),
        grid: *record.hist.grid(),
        outcomes,
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() < ANGLE_TOL
}

fn choose_alpha(records: &[Record], requested: Option<f64>) -> f64 {
    if let Some(a) = requested {
        return a;
    }
    let mut counts: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
    for r in records {
        let key = (r.meta.alpha_deg * 1e6).round() as i64;
        counts.entry(key).or_insert((0, r.meta.alpha_deg)).0 += 1;
    }
    counts
        .values()
        .fold((0usize, 0.0f64), |best, &(n, a)| if n > best.0 { (n, a) } else { best })
        .1
}

fn analyse(records: &[Record], analysis: &AnalysisConfig, seed_override: Option<u64>, out: &Path) -> Result<EstimateReport> {
    if records.is_empty() {
        return invalid("no histogram files with JSON sidecars found");
    }
    let n = records[0].meta.n_atoms;
    if records.iter().any(|r| r.meta.n_atoms != n) {
        return Err(Error::BinningMismatch("histograms disagree on n_atoms".into()));
    }
    let alpha = choose_alpha(records, analysis.alpha_deg);
    let width = analysis.bin_width.unwrap_or(4.0 / n as f64);
    let seed_of = |r: &Record| seed_override.or(r.meta.seed).unwrap_or(0);

    let at_alpha: Vec<&Record> = records
        .iter()
        .filter(|r| same(r.meta.alpha_deg, alpha) && r.meta.theta_deg.abs() <= analysis.fit_range_deg)
        .collect();
    let reference = at_alpha
        .iter()
        .find(|r| same(r.meta.theta_deg, 0.0))
        .ok_or_else(|| Error::InvalidArgument(format!("no θ = 0 reference histogram at α = {alpha}°")))?;
    let others: Vec<&Record> = at_alpha.iter().copied().filter(|r| !same(r.meta.theta_deg, 0.0)).collect();

    let ref_draws = expand(reference, seed_of(reference)).rebin(width)?;
    let other_draws: Vec<Draws> = others
        .iter()
        .map(|r| expand(r, seed_of(r)).rebin(width))
        .collect::<Result<_>>()?;
    let hell = hellinger_fisher(&ref_draws, &other_draws, n, &analysis.jackknife, &analysis.fit)?;
    let est = &hell.estimate;

    let mut thetas_sorted: Vec<(f64, usize)> = std::iter::once((0.0, 0))
        .chain(others.iter().enumerate().map(|(i, r)| (r.meta.theta_deg, i + 1)))
        .collect();
    thetas_sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let jackknife = thetas_sorted
        .iter()
        .map(|&(theta_deg, k)| {
            let j = &hell.jackknife[k];
            JackknifeEntry {
                theta_deg,
                estimate: j.estimate,
                std_error: j.std_error,
                raw: j.raw,
                blocks: j.blocks.clone(),
            }
        })
        .collect();

    let bayes = if analysis.bayes.enabled && ref_draws.len() > analysis.bayes.holdout && analysis.bayes.holdout > 0 {
        let (kept, held) = ref_draws.split_at(ref_draws.len() - analysis.bayes.holdout);
        let mut family = vec![(0.0, kept.histogram().to_distribution()?)];
        for (r, d) in others.iter().zip(&other_draws) {
            family.push((r.meta.theta_deg.to_radians(), d.histogram().to_distribution()?));
        }
        family.sort_by(|a, b| a.0.total_cmp(&b.0));
        let thetas: Vec<f64> = family.iter().map(|f| f.0).collect();
        let dists: Vec<_> = family.into_iter().map(|f| f.1).collect();
        let m = analysis.bayes.sequence_length;
        let z = held.z_values();
        let mut sigma2 = Vec::new();
        let mut centers = Vec::new();
        let mut discarded = 0;
        let mut sequences = 0;
        for chunk in z.chunks_exact(m) {
            sequences += 1;
            let r = match bayesian_estimate(chunk, &thetas, &dists) {
                Ok(r) => r,
                Err(Error::EmptySequence) => {
                    discarded += chunk.len();
                    continue;
                }
                Err(e) => return Err(e),
            };
            discarded += r.discarded_count;
            if let (true, Some(s), Some(c)) = (r.concave, r.sigma2, r.theta_center) {
                sigma2.push(s);
                centers.push(c);
            }
        }
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let mean_sigma2 = mean(&sigma2);
        Some(BayesSummary {
            holdout: analysis.bayes.holdout,
            sequence_length: m,
            sequences,
            concave: sigma2.len(),
            mean_sigma2,
            mean_theta_center_deg: mean(&centers).map(f64::to_degrees),
            sigma2_m_fisher: mean_sigma2.map(|s| s * m as f64 * est.fisher),
            discarded,
        })
    } else {
        None
    };

    let zero_theta: Vec<_> = records.iter().filter(|r| same(r.meta.theta_deg, 0.0)).collect();
    let visibility = analysis.visibility.or_else(|| {
        records
            .iter()
            .find(|r| same(r.meta.theta_deg.abs(), 90.0))
            .map(|r| r.hist.mean_z().abs())
    });
    let squeezing = match visibility {
        Some(v) if v > 0.0 => {
            let dists = zero_theta
                .iter()
                .map(|r| r.hist.to_distribution())
                .collect::<Result<Vec<_>>>()?;
            Some(spin_squeezing(&dists, v.min(1.0))?)
        }
        _ => None,
    };

    let moments = {
        let mut fringe: Vec<(f64, f64, f64)> = at_alpha
            .iter()
            .map(|r| (r.meta.theta_deg.to_radians(), r.hist.mean_z(), r.hist.var_z()))
            .collect();
        fringe.sort_by(|a, b| a.0.total_cmp(&b.0));
        let idx = fringe.iter().position(|f| f.0 == 0.0);
        match idx {
            Some(i) if i > 0 && i + 1 < fringe.len() => {
                let (t, rest): (Vec<f64>, Vec<(f64, f64)>) = fringe.iter().map(|f| (f.0, (f.1, f.2))).unzip();
                let (m, v): (Vec<f64>, Vec<f64>) = rest.into_iter().unzip();
                Some(moment_sensitivity(&t, &m, &v, n, i)?)
            }
            _ => None,
        }
    };

    let tomography = if analysis.tomography.enabled {
        let hists: Vec<EmpiricalDistribution> = records.iter().map(|r| r.hist.clone()).collect();
        let opts = MleOptions {
            max_iterations: analysis.tomography.max_iterations,
            tolerance: analysis.tomography.tolerance,
            noise_sigma: analysis.tomography.noise_sigma,
            rank_one_polish: true,
        };
        let res = mle_reconstruct(&hists, n, &opts)?;
        write_atomic(&out.join("rho.json"), (serde_json::to_string(&res.rho)? + "\n").as_bytes())?;
        if analysis.tomography.husimi {
            write_atomic(&out.join("husimi.csv"), husimi(&res.rho).to_csv().as_bytes())?;
        }
        Some(TomographySummary {
            log_likelihood: res.log_likelihood,
            iterations: res.iterations,
            converged: res.converged,
            underdetermined: res.underdetermined,
            polished: res.polished,
            purity: res.rho.purity(),
        })
    } else {
        None
    };

    Ok(EstimateReport {
        n_atoms: n,
        alpha_deg: alpha,
        bin_width: width,
        fisher: est.fisher,
        fisher_per_atom: est.fisher_per_atom,
        std_error: est.std_error,
        ci68: est.ci68,
        entangled: est.entangled,
        fit: FitReport {
            cubic: analysis.fit.cubic,
            fisher_prime: est.fisher_prime,
            summary: est.fit.clone(),
            points: hell
                .points
                .iter()
                .map(|p: &FitPoint| FitPointDeg {
                    theta_deg: p.theta.to_degrees(),
                    d2: p.d2,
                    sigma: p.sigma,
                })
                .collect(),
        },
        c0_predicted: hell.c0_predicted,
        jackknife,
        bayes,
        squeezing,
        moments,
        tomography,
    })
}

/// Analyses one dataset directory, or each dataset subdirectory of `input`,
/// writing `results.json` under `out` (mirroring subdirectory names).
pub fn cmd_estimate(
    input: &Path,
    analysis: &AnalysisConfig,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<Vec<EstimateReport>> {
    let direct = load_dataset(input)?;
    let jobs: Vec<(PathBuf, Vec<Record>)> = if !direct.is_empty() {
        vec![(out.to_path_buf(), direct)]
    } else {
        let mut v = Vec::new();
        for sub in sorted_entries(input)?.into_iter().filter(|p| p.is_dir()) {
            let recs = load_dataset(&sub)?;
            if !recs.is_empty() {
                v.push((out.join(sub.file_name().expect("directory entry has a name")), recs));
            }
        }
        v
    };
    if jobs.is_empty() {
        return invalid(format!("no histogram datasets under {}", input.display()));
    }
    let mut reports = Vec::new();
    for (dir, records) in &jobs {
        let report = analyse(records, analysis, seed_override, dir)?;
        write_atomic(&dir.join("results.json"), (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
        reports.push(report);
    }
    Ok(reports)
}
