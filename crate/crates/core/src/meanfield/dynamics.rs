use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Vector2;
use ode_solvers::{Dop853, System};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spin::HamiltonianParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub z: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(z: f64, phi: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&z) || !phi.is_finite() {
            return invalid(format!("phase point ({z}, {phi}) needs |z| ≤ 1 and finite φ"));
        }
        Ok(Self { z, phi })
    }

    /// `φ` reduced to `[0, 2π)`.
    pub fn wrapped_phi(&self) -> f64 {
        self.phi.rem_euclid(2.0 * PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalParams {
    pub lambda: f64,
    pub delta_over_omega: f64,
    /// Coupling `Ω` in rad/s, setting the time scale.
    pub omega: f64,
    pub n_atoms: f64,
}

impl ClassicalParams {
    pub fn new(lambda: f64, delta_over_omega: f64, omega: f64, n_atoms: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() || !delta_over_omega.is_finite() || !(omega > 0.0) || !(n_atoms > 0.0)
        {
            return invalid("classical parameters need Λ > 0, Ω > 0, N > 0 and finite δ/Ω");
        }
        Ok(Self {
            lambda,
            delta_over_omega,
            omega,
            n_atoms,
        })
    }

    /// `Λ = Nχ/Ω`, `δ/Ω` from the quantum parameters.
    pub fn from_hamiltonian(p: &HamiltonianParams, n_atoms: usize) -> Result<Self> {
        Self::new(p.lambda(n_atoms), p.delta / p.omega, p.omega, n_atoms as f64)
    }

    /// Energy unit `NΩ/2`.
    pub fn n_omega(&self) -> f64 {
        self.n_atoms * self.omega / 2.0
    }

    fn reduced_energy(&self, z: f64, phi: f64) -> f64 {
        self.lambda * z * z / 2.0 - (1.0 - z * z).max(0.0).sqrt() * phi.cos() + self.delta_over_omega * z
    }

    /// `∂h/∂z` on the line `sin φ = 0`, with `c = cos φ`.
    fn axis_slope(&self, z: f64, c: f64) -> f64 {
        self.lambda * z + c * z / (1.0 - z * z).sqrt() + self.delta_over_omega
    }

    fn axis_curvature(&self, z: f64, c: f64) -> f64 {
        self.lambda + c / (1.0 - z * z).powf(1.5)
    }

    fn rates(&self, z: f64, phi: f64) -> (f64, f64) {
        let r = (1.0 - z * z).max(0.0).sqrt();
        let zdot = -self.omega * r * phi.sin();
        let phidot = self.omega * (self.lambda * z + z * phi.cos() / r + self.delta_over_omega);
        (zdot, phidot)
    }
}

pub fn classical_energy(p: PhasePoint, params: &ClassicalParams) -> f64 {
    params.n_omega() * params.reduced_energy(p.z, p.phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub point: PhasePoint,
    pub stability: Stability,
    /// Squared Jacobian eigenvalue `λ²`; positive for a saddle, negative for a center.
    pub eigenvalue_sq: f64,
    /// Unit tangent `(dz, dφ)` of the unstable manifold, for saddles.
    pub unstable_direction: Option<[f64; 2]>,
}

const SCAN: usize = 20_000;

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if hi - lo < 1e-12 {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::RootNotFound(format!("bracket [{lo}, {hi}] did not shrink")))
    }
}

/// Sign changes of `f` on a uniform scan of `[lo, hi]`, refined by bisection.
fn roots(f: impl Fn(f64) -> f64 + Copy, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let step = (hi - lo) / SCAN as f64;
    let mut out = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=SCAN {
        let b = lo + i as f64 * step;
        let fb = f(b);
        if fa == 0.0 {
            out.push(a);
        } else if fa * fb < 0.0 {
            out.push(bisect(f, a, b)?);
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        out.push(a);
    }
    Ok(out)
}

/// Interior fixed points, which all lie on `φ ∈ {0, π}`.
pub fn fixed_points(params: &ClassicalParams) -> Result<Vec<FixedPoint>> {
    let edge = 1.0 - 1e-12;
    let mut out = Vec::new();
    for phi in [0.0, PI] {
        let c = phi.cos();
        for z in roots(|z| params.axis_slope(z, c), -edge, edge)? {
            let h_zz = params.axis_curvature(z, c);
            let r = (1.0 - z * z).sqrt();
            let w2 = params.omega * params.omega;
            let eigenvalue_sq = -w2 * r * c * h_zz;
            let stability = if eigenvalue_sq > 0.0 {
                Stability::Unstable
            } else {
                Stability::Stable
            };
            let unstable_direction = (eigenvalue_sq > 0.0).then(|| {
                // Jacobian [[0, a], [b, 0]]; eigenvector (a, √(ab))
                let a = -params.omega * r * c;
                let v = [a, eigenvalue_sq.sqrt()];
                let norm = v[0].hypot(v[1]);
                [v[0] / norm, v[1] / norm]
            });
            out.push(FixedPoint {
                point: PhasePoint { z, phi },
                stability,
                eigenvalue_sq,
                unstable_direction,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOptions {
    /// Sampling interval of the returned path in seconds.
    pub output_step: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Allowed relative energy drift over the span.
    pub energy_tolerance: f64,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            output_step: 1e-4,
            rtol: 1e-12,
            atol: 1e-13,
            energy_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// Largest `|E(t) − E(0)| / max(|E(0)|, NΩ/2)` seen on the path.
    pub energy_drift: f64,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,z,phi\n");
        for (t, p) in self.times.iter().zip(&self.points) {
            writeln!(out, "{t},{},{}", p.z, p.phi).expect("writing to a String");
        }
        out
    }
}

struct Flow(ClassicalParams);

impl System<f64, Vector2<f64>> for Flow {
    fn system(&self, _t: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        let (zdot, phidot) = self.0.rates(y[0], y[1]);
        dy[0] = zdot;
        dy[1] = phidot;
    }
}

/// Integrates the classical equations of motion from `start` over `[0, t_span]`.
pub fn trajectory(
    start: PhasePoint,
    params: &ClassicalParams,
    t_span: f64,
    options: &TrajectoryOptions,
) -> Result<Trajectory> {
    if !(t_span > 0.0) || !(options.output_step > 0.0) {
        return invalid("time span and output step must be positive");
    }
    let n_steps = (t_span / options.output_step).ceil() as usize;
    if start.z.abs() >= 1.0 {
        // the poles are fixed endpoints of the flow
        let times: Vec<f64> = (0..=n_steps).map(|i| (i as f64 * options.output_step).min(t_span)).collect();
        let points = vec![start; times.len()];
        return Ok(Trajectory {
            times,
            points,
            energy_drift: 0.0,
        });
    }
    let mut solver = Dop853::new(
        Flow(*params),
        0.0,
        t_span,
        options.output_step,
        Vector2::new(start.z, start.phi),
        options.rtol,
        options.atol,
    );
    solver.integrate().map_err(|e| {
        use ode_solvers::dop_shared::IntegrationError as E;
        match e {
            E::StepSizeUnderflow { x } | E::MaxNumStepReached { x, .. } | E::StiffnessDetected { x } => {
                Error::StepUnderflow(x)
            }
        }
    })?;
    let times = solver.x_out().clone();
    let points: Vec<PhasePoint> = solver
        .y_out()
        .iter()
        .map(|y| PhasePoint {
            z: y[0].clamp(-1.0, 1.0),
            phi: y[1],
        })
        .collect();
    let e0 = params.reduced_energy(start.z, start.phi);
    let scale = e0.abs().max(1.0);
    let energy_drift = solver
        .y_out()
        .iter()
        .map(|y| (params.reduced_energy(y[0], y[1]) - e0).abs() / scale)
        .fold(0.0, f64::max);
    if energy_drift > options.energy_tolerance {
        return Err(Error::NonConvergence {
            halvings: 0,
            defect: energy_drift,
        });
    }
    Ok(Trajectory {
        times,
        points,
        energy_drift,
    })
}

/// Level set of the energy through the saddle, sampled on `samples` azimuths over `[0, 2π)`.
pub fn separatrix(params: &ClassicalParams, samples: usize) -> Result<Vec<PhasePoint>> {
    let saddle = fixed_points(params)?
        .into_iter()
        .find(|f| f.stability == Stability::Unstable)
        .ok_or_else(|| Error::InvalidArgument("no unstable fixed point, so no separatrix".into()))?;
    let level = params.reduced_energy(saddle.point.z, saddle.point.phi);
    let mut out = vec![saddle.point];
    for i in 0..samples {
        let phi = 2.0 * PI * i as f64 / samples as f64;
        for z in roots(|z| params.reduced_energy(z, phi) - level, -1.0, 1.0)? {
            out.push(PhasePoint { z, phi });
        }
    }
    Ok(out)
}

/// `phi,z` rows of a separatrix contour.
pub fn contour_csv(points: &[PhasePoint]) -> String {
    let mut out = String::from("phi,z\n");
    for p in points {
        writeln!(out, "{},{}", p.phi, p.z).expect("writing to a String");
    }
    out
}
