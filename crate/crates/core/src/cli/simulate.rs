use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Dynamics, ExperimentConfig, RunConfig};
use super::files::{rng_for, stem_for, time_dir, write_atomic};
use crate::error::{Error, Result};
use crate::measure::io::{draws_csv, histogram_csv, probability_csv, HistogramMeta};
use crate::measure::{outcome_distribution, sample_draws, NoiseKind, ProbabilityDistribution, Readout, Setting};
use crate::spin::{
    build_operators, coherent_state, evolve_constant, run_sequence, DickeState, HamiltonianParams, SpinOperators, StepControl,
    Tridiagonal,
};

struct Task {
    time_index: usize,
    t_ms: f64,
    alpha_deg: f64,
    theta_deg: f64,
}

/// Evolved state of the ideal model at `t_ms`, shared by all its settings.
fn ideal_state(exp: &ExperimentConfig, ops: &SpinOperators, t_ms: f64) -> Result<Option<DickeState>> {
    let Dynamics::Ideal {
        lambda,
        omega_hz,
        delta_hz,
    } = &exp.dynamics
    else {
        return Ok(None);
    };
    let params = HamiltonianParams::from_lambda(exp.n_atoms, *lambda, 2.0 * PI * omega_hz, 2.0 * PI * delta_hz)?;
    let start = coherent_state(exp.n_atoms, FRAC_PI_2, PI)?;
    evolve_constant(&start, &Tridiagonal::josephson(ops, &params), t_ms * 1e-3).map(Some)
}

fn distribution_for(
    exp: &ExperimentConfig,
    ops: &SpinOperators,
    ideal: Option<&DickeState>,
    task: &Task,
) -> Result<ProbabilityDistribution> {
    let setting = Setting::new(task.alpha_deg.to_radians(), task.theta_deg.to_radians());
    let dist = match (&exp.dynamics, ideal) {
        (Dynamics::Sequence { omega_hz, loss, pulses }, _) => {
            let state = run_sequence(
                ops,
                loss,
                2.0 * PI * omega_hz,
                task.t_ms * 1e-3,
                setting.alpha,
                setting.theta,
                &pulses.to_pulses()?,
                &StepControl::default(),
            )?;
            ProbabilityDistribution::from_populations(&state, setting)?
        }
        (Dynamics::Ideal { .. }, Some(state)) => outcome_distribution(state, ops, setting, &Readout::default())?,
        (Dynamics::Ideal { .. }, None) => unreachable!("ideal states are evolved before sampling"),
    };
    exp.noise.apply(&dist, NoiseKind::Total)
}

/// Simulates every configured setting and writes histograms with JSON sidecars,
/// one directory per evolution time.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path, seed_override: Option<u64>) -> Result<()> {
    let exp = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("simulate needs an `experiment` section".into()))?;
    let seed = seed_override.unwrap_or(cfg.sampling.seed);
    let ops = build_operators(exp.n_atoms)?;
    let states: Vec<Option<DickeState>> = exp
        .times_ms
        .par_iter()
        .map(|&t| ideal_state(exp, &ops, t))
        .collect::<Result<_>>()?;
    let tasks: Vec<Task> = exp
        .times_ms
        .iter()
        .enumerate()
        .flat_map(|(time_index, &t_ms)| {
            exp.alpha_deg.iter().flat_map(move |&alpha_deg| {
                exp.theta_deg.iter().map(move |&theta_deg| Task {
                    time_index,
                    t_ms,
                    alpha_deg,
                    theta_deg,
                })
            })
        })
        .collect();
    let files: Vec<Vec<(PathBuf, String)>> = tasks
        .par_iter()
        .map(|task| {
            let dist = distribution_for(exp, &ops, states[task.time_index].as_ref(), task)?;
            let m = if task.theta_deg == 0.0 {
                cfg.sampling.reference_draws
            } else {
                cfg.sampling.draws
            };
            let label = format!("t={:.6};alpha={:.6};theta={:.6}", task.t_ms, task.alpha_deg, task.theta_deg);
            let draws = sample_draws(&dist, m, &mut rng_for(seed, &label))?;
            let dir = time_dir(out, task.t_ms);
            let stem = stem_for(task.alpha_deg, task.theta_deg);
            let mut meta = HistogramMeta::new(dist.grid(), dist.setting(), Some(seed));
            meta.alpha_deg = task.alpha_deg;
            meta.theta_deg = task.theta_deg;
            let mut f = vec![
                (dir.join(format!("{stem}.csv")), histogram_csv(&draws.histogram())),
                (dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)? + "\n"),
            ];
            if cfg.sampling.exact {
                f.push((dir.join(format!("{stem}.prob.csv")), probability_csv(&dist)));
            }
            if cfg.sampling.write_draws {
                f.push((dir.join(format!("{stem}.draws.csv")), draws_csv(&draws)));
            }
            Ok(f)
        })
        .collect::<Result<_>>()?;
    for (path, text) in files.into_iter().flatten() {
        write_atomic(&path, text.as_bytes())?;
    }
    log::info!("simulated {} settings into {}", tasks.len(), out.display());
    Ok(())
}
