//! C ABI for `clausius-lab`.
//!
//! Every fallible call returns a [`ClStatus`] and writes its result through
//! an out-pointer. On failure the message is kept per thread and can be read
//! with [`cl_last_error`]. Objects that carry state ([`ClSystem`],
//! [`ClEnsemble`]) are opaque and must be released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;

use clausius_lab::bath::{self, BathSpec, MomentRoute};
use clausius_lab::cli::parse_ensemble;
use clausius_lab::gaussian::{entropy, symplectic_param};
use clausius_lab::info::{self, CMatrix, DensityMatrix, Ensemble};
use clausius_lab::oracle::{self, FrequencyGrid};
use clausius_lab::thermo::{self, ThermoReport};
use clausius_lab::{Constants, Error, OscillatorParams};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Parse = 4,
    /// A Rust panic was caught at the boundary; please report it.
    Internal = 5,
}

/// Which continuum evaluation to use for the moments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClRoute {
    /// Matsubara, or the spectral integral at very low temperature.
    Auto = 0,
    Matsubara = 1,
    Spectral = 2,
}

/// `<q^2>`, `<p^2>` and the symmetrized `<qp + pq>/2`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ClMoments {
    pub f1: f64,
    pub f2: f64,
    pub cross: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ClThermoReport {
    pub delta_entropy: f64,
    pub heat: f64,
    pub heat_error: f64,
    /// `k_B T dS - Q`; negative means the Clausius inequality fails.
    pub slack: f64,
    pub clausius_satisfied: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ClComposedReport {
    pub coupling: ClThermoReport,
    pub mass: ClThermoReport,
    pub total: ClThermoReport,
}

/// Oscillator plus bath, in natural units.
pub struct ClSystem {
    oscillator: OscillatorParams,
    bath: BathSpec,
}

/// A finite ensemble of density matrices with prior probabilities.
pub struct ClEnsemble(Ensemble);

const C: Constants = Constants::NATURAL;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> ClStatus {
    match e {
        Error::InvalidParameter { .. } | Error::InvalidState(_) | Error::DimensionMismatch { .. } | Error::Config(_) => {
            ClStatus::InvalidArgument
        }
        Error::Parse { .. } | Error::Io(_) => ClStatus::Parse,
        Error::Uncertainty { .. } | Error::Numerical { .. } | Error::Eigen(_) | Error::UnstableMode { .. } => {
            ClStatus::Numerical
        }
    }
}

/// Runs `f`, records any error and converts panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), (ClStatus, String)>) -> ClStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            ClStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error (panic)".into());
            ClStatus::Internal
        }
    }
}

fn lift<T>(r: clausius_lab::Result<T>) -> Result<T, (ClStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (ClStatus, String) {
    (ClStatus::NullPointer, format!("`{what}` is null"))
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn write<T>(p: *mut T, what: &str, value: T) -> Result<(), (ClStatus, String)> {
    let out = unsafe { p.as_mut() }.ok_or_else(|| null(what))?;
    *out = value;
    Ok(())
}

fn report(r: &ThermoReport) -> ClThermoReport {
    ClThermoReport {
        delta_entropy: r.delta_entropy,
        heat: r.heat,
        heat_error: r.heat_error,
        slack: r.slack,
        clausius_satisfied: r.clausius_satisfied,
    }
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next `cl_*` call on the same thread.
#[no_mangle]
pub extern "C" fn cl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a system from physical parameters: oscillator mass and
/// frequency, bath temperature, damping rate and Drude cutoff.
///
/// # Safety
/// `out` must be valid for writes. The handle must be freed with [`cl_system_free`].
#[no_mangle]
pub unsafe extern "C" fn cl_system_new(
    mass: f64,
    frequency: f64,
    temperature: f64,
    damping: f64,
    cutoff: f64,
    out: *mut *mut ClSystem,
) -> ClStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let oscillator = lift(OscillatorParams::new(mass, frequency))?;
        let bath = lift(BathSpec::new(temperature, damping, cutoff))?;
        unsafe { write(out, "out", Box::into_raw(Box::new(ClSystem { oscillator, bath }))) }
    })
}

/// Creates a unit oscillator (`M = omega = 1`) with a bath given by the
/// ratios `k_B T/hbar omega`, `gamma/omega` and `wD/omega`.
///
/// # Safety
/// As for [`cl_system_new`].
#[no_mangle]
pub unsafe extern "C" fn cl_system_from_ratios(
    reduced_temperature: f64,
    damping_ratio: f64,
    cutoff_ratio: f64,
    out: *mut *mut ClSystem,
) -> ClStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let oscillator = OscillatorParams::unit();
        let bath = lift(BathSpec::from_ratios(&oscillator, reduced_temperature, damping_ratio, cutoff_ratio, &C))?;
        unsafe { write(out, "out", Box::into_raw(Box::new(ClSystem { oscillator, bath }))) }
    })
}

/// # Safety
/// `system` is null or a handle from `cl_system_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_system_free(system: *mut ClSystem) {
    if !system.is_null() {
        drop(unsafe { Box::from_raw(system) });
    }
}

/// Equilibrium moments of the reduced oscillator state.
///
/// # Safety
/// `system` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cl_moments(system: *const ClSystem, route: ClRoute, out: *mut ClMoments) -> ClStatus {
    guard(|| {
        let s = unsafe { system.as_ref() }.ok_or_else(|| null("system"))?;
        let route = match route {
            ClRoute::Auto => MomentRoute::default_for(&s.oscillator, &s.bath, &C),
            ClRoute::Matsubara => MomentRoute::Matsubara,
            ClRoute::Spectral => MomentRoute::SpectralIntegral,
        };
        let m = lift(bath::moments(&s.oscillator, &s.bath, &C, route))?;
        unsafe { write(out, "out", ClMoments { f1: m.f1, f2: m.f2, cross: m.cross }) }
    })
}

/// Moments from an explicit bath of `modes` oscillators, diagonalized
/// exactly. `omega_max <= 0` picks the default `20 max(wD, omega)`.
///
/// # Safety
/// As for [`cl_moments`].
#[no_mangle]
pub unsafe extern "C" fn cl_oracle_moments(
    system: *const ClSystem,
    modes: usize,
    omega_max: f64,
    out: *mut ClMoments,
) -> ClStatus {
    guard(|| {
        let s = unsafe { system.as_ref() }.ok_or_else(|| null("system"))?;
        let wmax = if omega_max > 0.0 { omega_max } else { oracle::default_omega_max(&s.oscillator, &s.bath) };
        let db = lift(oracle::sample_bath(&s.bath, &s.oscillator, modes, wmax, FrequencyGrid::default()))?;
        let m = lift(oracle::reduced_moments_exact(&db, &s.oscillator, s.bath.temperature, &C))?;
        unsafe { write(out, "out", ClMoments { f1: m.f1, f2: m.f2, cross: m.cross }) }
    })
}

/// Von Neumann entropy (nats) of the Gaussian state with these moments.
///
/// # Safety
/// `moments` is readable; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cl_gaussian_entropy(moments: *const ClMoments, out: *mut f64) -> ClStatus {
    guard(|| {
        let m = unsafe { moments.as_ref() }.ok_or_else(|| null("moments"))?;
        let m = lift(clausius_lab::Moments::new(m.f1, m.f2, m.cross))?;
        let v = lift(symplectic_param(&m, &C))?;
        unsafe { write(out, "out", entropy(v)) }
    })
}

/// Mass change `M -> mass_factor M` at fixed friction `M gamma`.
/// `grid_points` must be odd and at least 9.
///
/// # Safety
/// As for [`cl_moments`].
#[no_mangle]
pub unsafe extern "C" fn cl_mass_process(
    system: *const ClSystem,
    mass_factor: f64,
    grid_points: usize,
    out: *mut ClThermoReport,
) -> ClStatus {
    guard(|| {
        let s = unsafe { system.as_ref() }.ok_or_else(|| null("system"))?;
        let r = lift(thermo::mass_process(&s.oscillator, &s.bath, &C, mass_factor, grid_points))?;
        unsafe { write(out, "out", report(&r)) }
    })
}

/// Switch the coupling on, then change the mass; reports both steps and the total.
///
/// # Safety
/// As for [`cl_moments`].
#[no_mangle]
pub unsafe extern "C" fn cl_composed_process(
    system: *const ClSystem,
    mass_factor: f64,
    grid_points: usize,
    out: *mut ClComposedReport,
) -> ClStatus {
    guard(|| {
        let s = unsafe { system.as_ref() }.ok_or_else(|| null("system"))?;
        let r = lift(thermo::composed_process(&s.oscillator, &s.bath, &C, mass_factor, grid_points))?;
        let value = ClComposedReport {
            coupling: report(&r.coupling),
            mass: report(&r.mass),
            total: report(&r.total),
        };
        unsafe { write(out, "out", value) }
    })
}

/// Minimal erasure heat `k_B T S` for entropy `entropy` (nats).
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cl_landauer_bound(entropy: f64, temperature: f64, out: *mut f64) -> ClStatus {
    guard(|| {
        let q = lift(thermo::landauer_bound(entropy, temperature, &C))?;
        unsafe { write(out, "out", q) }
    })
}

/// Builds an ensemble of `count` states of dimension `dim`. Matrix `k` is
/// read row-major from `re[k*dim*dim ..]` and `im[k*dim*dim ..]`.
///
/// # Safety
/// `probabilities` has `count` entries, `re` and `im` have `count*dim*dim`
/// entries each, `out` is valid for writes. Free with [`cl_ensemble_free`].
#[no_mangle]
pub unsafe extern "C" fn cl_ensemble_new(
    dim: usize,
    count: usize,
    probabilities: *const f64,
    re: *const f64,
    im: *const f64,
    out: *mut *mut ClEnsemble,
) -> ClStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if probabilities.is_null() || re.is_null() || im.is_null() {
            return Err(null("probabilities/re/im"));
        }
        if dim == 0 || count == 0 {
            return Err((ClStatus::InvalidArgument, "dim and count must be positive".into()));
        }
        let block = dim
            .checked_mul(dim)
            .and_then(|b| b.checked_mul(count))
            .ok_or((ClStatus::InvalidArgument, "ensemble too large".to_string()))?;
        let p = unsafe { std::slice::from_raw_parts(probabilities, count) };
        let re = unsafe { std::slice::from_raw_parts(re, block) };
        let im = unsafe { std::slice::from_raw_parts(im, block) };
        let states = (0..count)
            .map(|k| {
                let off = k * dim * dim;
                DensityMatrix::new(CMatrix::from_fn(dim, dim, |r, c| {
                    Complex64::new(re[off + r * dim + c], im[off + r * dim + c])
                }))
            })
            .collect::<clausius_lab::Result<Vec<_>>>();
        let e = lift(states.and_then(|s| Ensemble::new(p.to_vec(), s)))?;
        unsafe { write(out, "out", Box::into_raw(Box::new(ClEnsemble(e)))) }
    })
}

/// Parses the plain-text ensemble format used by the CLI.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cl_ensemble_parse(text: *const c_char, out: *mut *mut ClEnsemble) -> ClStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(null("text/out"));
        }
        let text = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|_| (ClStatus::Parse, "ensemble text is not UTF-8".to_string()))?;
        let e = lift(parse_ensemble(text))?;
        unsafe { write(out, "out", Box::into_raw(Box::new(ClEnsemble(e)))) }
    })
}

/// # Safety
/// `ensemble` is null or a live handle from `cl_ensemble_*`.
#[no_mangle]
pub unsafe extern "C" fn cl_ensemble_free(ensemble: *mut ClEnsemble) {
    if !ensemble.is_null() {
        drop(unsafe { Box::from_raw(ensemble) });
    }
}

/// Holevo quantity in nats.
///
/// # Safety
/// `ensemble` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cl_holevo_chi(ensemble: *const ClEnsemble, out: *mut f64) -> ClStatus {
    guard(|| {
        let e = unsafe { ensemble.as_ref() }.ok_or_else(|| null("ensemble"))?;
        let chi = lift(info::holevo_chi(&e.0))?;
        unsafe { write(out, "out", chi) }
    })
}

/// Best mutual information (nats) found by searching projective qubit
/// measurements; a lower bound on the accessible information. `effort`
/// sets the search grid (32 is a good default).
///
/// # Safety
/// As for [`cl_holevo_chi`].
#[no_mangle]
pub unsafe extern "C" fn cl_accessible_info_lower(ensemble: *const ClEnsemble, effort: usize, out: *mut f64) -> ClStatus {
    guard(|| {
        let e = unsafe { ensemble.as_ref() }.ok_or_else(|| null("ensemble"))?;
        let a = lift(info::accessible_info_lower(&e.0, effort))?;
        unsafe { write(out, "out", a.value) }
    })
}
