//! C ABI over the spinfisher library.
//!
//! Objects cross the boundary as opaque handles created by `sf_*` constructors
//! and released with the matching `*_free`. Every fallible call returns an
//! [`SfStatus`]; on failure [`sf_last_error`] describes the problem for the
//! calling thread. Panics are caught and reported as `SF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spinfisher::estimate::{bias_terms, cramer_rao_bound, fit_fisher, hellinger_squared, FitOptions, FitPoint};
use spinfisher::meanfield::{classical_energy, fixed_points, ClassicalParams, PhasePoint, Stability};
use spinfisher::measure::{convolve_noise, outcome_distribution, sample, ProbabilityDistribution, Readout, Rebin, Setting};
use spinfisher::spin::{build_operators, coherent_state, evolve_constant, qfi, DickeState, HamiltonianParams, Tridiagonal};
use spinfisher::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    InvalidArgument = 1,
    DimensionMismatch = 2,
    NotNormalized = 3,
    NonConvergence = 4,
    Numerical = 5,
    BinningMismatch = 6,
    NullPointer = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque pure state in the Dicke basis.
pub struct SfState(DickeState);

/// Opaque outcome distribution over imbalance bins.
pub struct SfDistribution(ProbabilityDistribution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(SfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) | Error::Parse(_) | Error::Json(_) | Error::Io(_) => SfStatus::InvalidArgument,
            Error::DimensionMismatch { .. } => SfStatus::DimensionMismatch,
            Error::NotNormalized(_) => SfStatus::NotNormalized,
            Error::NonConvergence { .. } | Error::LikelihoodStall { .. } | Error::RootNotFound(_) => {
                SfStatus::NonConvergence
            }
            Error::BinningMismatch(_) | Error::NonCommensurate { .. } => SfStatus::BinningMismatch,
            _ => SfStatus::Numerical,
        };
        Failure(code, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SfStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SfStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            SfStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn buffer<'a>(p: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < needed {
        return Err(Failure(SfStatus::BufferTooSmall, format!("{what} needs {needed} entries, got {len}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Coherent state of `n_atoms` pointing along `(sin ϑ cos φ, sin ϑ sin φ, −cos ϑ)`.
///
/// # Safety
/// `out` must be a valid pointer; the handle written there is owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn sf_coherent_state(n_atoms: usize, polar: f64, azimuth: f64, out_state: *mut *mut SfState) -> SfStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let s = coherent_state(n_atoms, polar, azimuth)?;
        *slot = Box::into_raw(Box::new(SfState(s)));
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_state_free(state: *mut SfState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of amplitudes, `n_atoms + 1`.
///
/// # Safety
/// `state` and `out_dim` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_state_dim(state: *const SfState, out_dim: *mut usize) -> SfStatus {
    guard(|| {
        *out(out_dim, "out_dim")? = borrow(state, "state")?.0.dim();
        Ok(())
    })
}

/// Copies the amplitudes into `re` and `im`, each of capacity `len`.
///
/// # Safety
/// `re` and `im` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_state_amplitudes(state: *const SfState, re: *mut f64, im: *mut f64, len: usize) -> SfStatus {
    guard(|| {
        let s = &borrow(state, "state")?.0;
        let d = s.dim();
        let re = buffer(re, len, d, "re")?;
        let im = buffer(im, len, d, "im")?;
        for (k, a) in s.amplitudes().iter().enumerate() {
            re[k] = a.re;
            im[k] = a.im;
        }
        Ok(())
    })
}

/// Evolves under `χJz² − ΩJx + δJz` (rad/s) for `duration` seconds into a new handle.
///
/// # Safety
/// `state` and `out_state` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_state_evolve_constant(
    state: *const SfState,
    chi: f64,
    omega: f64,
    delta: f64,
    duration: f64,
    out_state: *mut *mut SfState,
) -> SfStatus {
    guard(|| {
        let s = &borrow(state, "state")?.0;
        let slot = out(out_state, "out_state")?;
        let ops = build_operators(s.n_atoms())?;
        let h = Tridiagonal::josephson(&ops, &HamiltonianParams::new(chi, omega, delta)?);
        *slot = Box::into_raw(Box::new(SfState(evolve_constant(s, &h, duration)?)));
        Ok(())
    })
}

/// Quantum Fisher information for collective rotations.
///
/// # Safety
/// `state` and `out_qfi` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_state_qfi(state: *const SfState, out_qfi: *mut f64) -> SfStatus {
    guard(|| {
        let s = &borrow(state, "state")?.0;
        let ops = build_operators(s.n_atoms())?;
        *out(out_qfi, "out_qfi")? = qfi(s, &ops)?;
        Ok(())
    })
}

/// Imbalance distribution after the tomography rotation `alpha` about x and readout rotation `theta` about y.
///
/// # Safety
/// `state` and `out_dist` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_distribution_from_state(
    state: *const SfState,
    alpha: f64,
    theta: f64,
    out_dist: *mut *mut SfDistribution,
) -> SfStatus {
    guard(|| {
        let s = &borrow(state, "state")?.0;
        let slot = out(out_dist, "out_dist")?;
        let ops = build_operators(s.n_atoms())?;
        let d = outcome_distribution(s, &ops, Setting::new(alpha, theta), &Readout::default())?;
        *slot = Box::into_raw(Box::new(SfDistribution(d)));
        Ok(())
    })
}

/// # Safety
/// `dist` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_distribution_free(dist: *mut SfDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Number of bins.
///
/// # Safety
/// `dist` and `out_len` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_distribution_len(dist: *const SfDistribution, out_len: *mut usize) -> SfStatus {
    guard(|| {
        *out(out_len, "out_len")? = borrow(dist, "dist")?.0.probs().len();
        Ok(())
    })
}

/// Copies bin centers into `z` and probabilities into `p`, each of capacity `len`.
///
/// # Safety
/// `z` and `p` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_distribution_values(dist: *const SfDistribution, z: *mut f64, p: *mut f64, len: usize) -> SfStatus {
    guard(|| {
        let d = &borrow(dist, "dist")?.0;
        let n = d.probs().len();
        buffer(z, len, n, "z")?.copy_from_slice(&d.support());
        buffer(p, len, n, "p")?.copy_from_slice(d.probs());
        Ok(())
    })
}

/// Gaussian noise of `sigma_atoms` on `N_b − N_a`, into a new handle.
///
/// # Safety
/// `dist` and `out_dist` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_distribution_convolve(
    dist: *const SfDistribution,
    sigma_atoms: f64,
    out_dist: *mut *mut SfDistribution,
) -> SfStatus {
    guard(|| {
        let d = convolve_noise(&borrow(dist, "dist")?.0, sigma_atoms)?;
        *out(out_dist, "out_dist")? = Box::into_raw(Box::new(SfDistribution(d)));
        Ok(())
    })
}

/// Merges bins to width `bin_width`, an integer multiple of the current width.
///
/// # Safety
/// `dist` and `out_dist` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_distribution_rebin(
    dist: *const SfDistribution,
    bin_width: f64,
    out_dist: *mut *mut SfDistribution,
) -> SfStatus {
    guard(|| {
        let d = borrow(dist, "dist")?.0.rebin(bin_width)?;
        *out(out_dist, "out_dist")? = Box::into_raw(Box::new(SfDistribution(d)));
        Ok(())
    })
}

/// Squared Hellinger distance of two distributions on compatible grids.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_hellinger_squared(a: *const SfDistribution, b: *const SfDistribution, out_d2: *mut f64) -> SfStatus {
    guard(|| {
        *out(out_d2, "out_d2")? = hellinger_squared(&borrow(a, "a")?.0, &borrow(b, "b")?.0)?;
        Ok(())
    })
}

/// Counts of `m_draws` multinomial samples, reproducible per `seed`, written into `counts` of capacity `len`.
///
/// # Safety
/// `counts` must point to at least `len` writable unsigned 64-bit integers.
#[no_mangle]
pub unsafe extern "C" fn sf_sample(dist: *const SfDistribution, m_draws: usize, seed: u64, counts: *mut u64, len: usize) -> SfStatus {
    guard(|| {
        let d = &borrow(dist, "dist")?.0;
        let h = sample(d, m_draws, seed)?;
        if counts.is_null() {
            return Err(null("counts"));
        }
        let n = h.counts().len();
        if len < n {
            return Err(Failure(SfStatus::BufferTooSmall, format!("counts needs {n} entries, got {len}")));
        }
        std::slice::from_raw_parts_mut(counts, n).copy_from_slice(h.counts());
        Ok(())
    })
}

/// Weighted fit of `d²(θ) = c + Fθ²/8 [+ F′θ³/16]` to `len` points.
///
/// # Safety
/// `thetas`, `d2` and `sigma` must point to `len` doubles; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_fit_fisher(
    thetas: *const f64,
    d2: *const f64,
    sigma: *const f64,
    len: usize,
    n_atoms: usize,
    cubic: bool,
    out_fisher: *mut f64,
    out_std_error: *mut f64,
) -> SfStatus {
    guard(|| {
        let t = input(thetas, len, "thetas")?;
        let d = input(d2, len, "d2")?;
        let s = input(sigma, len, "sigma")?;
        let points: Vec<FitPoint> = (0..len)
            .map(|i| FitPoint {
                theta: t[i],
                d2: d[i],
                sigma: s[i],
            })
            .collect();
        let est = fit_fisher(&points, n_atoms, &FitOptions { cubic })?;
        *out(out_fisher, "out_fisher")? = est.fisher;
        *out(out_std_error, "out_std_error")? = est.std_error;
        Ok(())
    })
}

/// Predicted sampling offset `c₀` and quadratic bias `c₂` of the squared Hellinger distance.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_bias_terms(n_occupied: usize, m_draws: usize, fisher: f64, out_c0: *mut f64, out_c2: *mut f64) -> SfStatus {
    guard(|| {
        if m_draws == 0 {
            return Err(Failure(SfStatus::InvalidArgument, "m_draws must be positive".into()));
        }
        let (c0, c2) = bias_terms(n_occupied, m_draws, fisher);
        *out(out_c0, "out_c0")? = c0;
        *out(out_c2, "out_c2")? = c2;
        Ok(())
    })
}

/// `1/√(mF)`.
///
/// # Safety
/// `out_bound` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_cramer_rao_bound(fisher: f64, m: usize, out_bound: *mut f64) -> SfStatus {
    guard(|| {
        *out(out_bound, "out_bound")? = cramer_rao_bound(fisher, m)?;
        Ok(())
    })
}

/// Classical energy `(NΩ/2)[Λz²/2 − √(1−z²) cos φ + (δ/Ω) z]`.
///
/// # Safety
/// `out_energy` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_classical_energy(
    lambda: f64,
    delta_over_omega: f64,
    omega: f64,
    n_atoms: f64,
    z: f64,
    phi: f64,
    out_energy: *mut f64,
) -> SfStatus {
    guard(|| {
        let p = ClassicalParams::new(lambda, delta_over_omega, omega, n_atoms)?;
        *out(out_energy, "out_energy")? = classical_energy(PhasePoint::new(z, phi)?, &p);
        Ok(())
    })
}

/// Classical fixed points; writes up to `capacity` entries and the total in `out_count`.
/// `stable[k]` is 1 for a center and 0 for a saddle.
///
/// # Safety
/// `z`, `phi` and `stable` must point to `capacity` writable entries; `out_count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_fixed_points(
    lambda: f64,
    delta_over_omega: f64,
    z: *mut f64,
    phi: *mut f64,
    stable: *mut i32,
    capacity: usize,
    out_count: *mut usize,
) -> SfStatus {
    guard(|| {
        let p = ClassicalParams::new(lambda, delta_over_omega, 1.0, 1.0)?;
        let fps = fixed_points(&p)?;
        *out(out_count, "out_count")? = fps.len();
        if capacity < fps.len() {
            return Err(Failure(
                SfStatus::BufferTooSmall,
                format!("{} fixed points, capacity {capacity}", fps.len()),
            ));
        }
        if fps.is_empty() {
            return Ok(());
        }
        if z.is_null() || phi.is_null() || stable.is_null() {
            return Err(null("fixed point buffers"));
        }
        for (k, f) in fps.iter().enumerate() {
            *z.add(k) = f.point.z;
            *phi.add(k) = f.point.phi;
            *stable.add(k) = (f.stability == Stability::Stable) as i32;
        }
        Ok(())
    })
}
