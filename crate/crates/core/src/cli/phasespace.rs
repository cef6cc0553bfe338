use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::files::write_atomic;
use crate::error::{Error, Result};
use crate::meanfield::{
    contour_csv, fixed_points, separatrix, trajectory, ClassicalParams, FixedPoint, PhasePoint, Stability,
    TrajectoryOptions,
};

#[derive(Serialize)]
struct FixedPointDoc {
    lambda: f64,
    delta_over_omega: f64,
    fixed_points: Vec<FixedPoint>,
}

/// Writes `fixed_points.json`, `separatrix.csv` when a saddle exists, and one `trajectory_<k>.csv` per start.
pub fn cmd_phasespace(cfg: &RunConfig, out: &Path) -> Result<()> {
    let ps = cfg
        .phasespace
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("phasespace needs a `phasespace` section".into()))?;
    let params = ClassicalParams::new(
        ps.lambda,
        ps.delta_over_omega,
        2.0 * std::f64::consts::PI * ps.omega_hz,
        ps.n_atoms,
    )?;
    let fps = fixed_points(&params)?;
    let has_saddle = fps.iter().any(|f| f.stability == Stability::Unstable);
    let contour = if has_saddle {
        Some(separatrix(&params, ps.separatrix_samples)?)
    } else {
        None
    };
    let options = TrajectoryOptions {
        output_step: ps.output_step_ms * 1e-3,
        ..TrajectoryOptions::default()
    };
    let paths = ps
        .trajectories
        .par_iter()
        .map(|s| {
            let start = PhasePoint::new(s.z, s.phi_deg.to_radians())?;
            trajectory(start, &params, s.duration_ms * 1e-3, &options)
        })
        .collect::<Result<Vec<_>>>()?;

    let doc = FixedPointDoc {
        lambda: ps.lambda,
        delta_over_omega: ps.delta_over_omega,
        fixed_points: fps,
    };
    write_atomic(&out.join("fixed_points.json"), (serde_json::to_string_pretty(&doc)? + "\n").as_bytes())?;
    if let Some(c) = contour {
        write_atomic(&out.join("separatrix.csv"), contour_csv(&c).as_bytes())?;
    }
    for (k, p) in paths.iter().enumerate() {
        write_atomic(&out.join(format!("trajectory_{k}.csv")), p.to_csv().as_bytes())?;
    }
    Ok(())
}
