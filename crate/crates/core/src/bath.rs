//! Equilibrium moments of an oscillator coupled to an Ohmic bath with a Drude
//! cutoff, `J(u) = M gamma u wD^2 / (u^2 + wD^2)`, in the convention where the
//! bare frequency `omega` is also the static (renormalized) frequency at every
//! coupling strength.
//!
//! Two independent routes are provided:
//!
//! * [`moments_matsubara`]: imaginary-frequency sums over `nu_n = 2 pi n k_B T / hbar`,
//!   closed with an Euler-Maclaurin tail;
//! * [`moments_spectral`]: the fluctuation-dissipation integral over the
//!   imaginary part of the susceptibility `chi(u) = 1 / (M (omega^2 - u^2 - i u gamma~(u)))`
//!   with `gamma~(u) = gamma wD / (wD - i u)`.
//!
//! The Matsubara route additionally gives the thermodynamic energy of the
//! damped oscillator and from it the heat the bath gives up while the
//! coupling is switched on ([`coupling_heat`]).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaussian::{coth, thermal_moments_decoupled, Moments, OscillatorParams};
use crate::quadrature::Integrator;
use crate::units::Constants;

/// Required relative accuracy of either route.
pub const ROUTE_REL_TOL: f64 = 1e-8;

/// Below this reduced temperature the Matsubara sums need too many terms and
/// the spectral integral becomes the default route.
pub const MATSUBARA_MIN_REDUCED_T: f64 = 0.02;

/// Relative error above which a derivative is reported as a failure.
pub const DERIVATIVE_REL_TOL: f64 = 1e-5;

/// Reduced temperatures `k_B T / hbar omega` of the standard test grid.
pub const STANDARD_TEMPERATURES: [f64; 5] = [0.05, 0.2, 1.0, 5.0, 20.0];
/// Reduced damping rates `gamma / omega` of the standard test grid.
pub const STANDARD_DAMPINGS: [f64; 5] = [0.0, 0.1, 1.0, 5.0, 10.0];
/// Cutoff ratios `wD / omega` of the standard test grid.
pub const STANDARD_CUTOFFS: [f64; 2] = [50.0, 200.0];

/// Bath temperature, Ohmic damping rate `gamma` and Drude cutoff `wD`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub temperature: f64,
    pub damping: f64,
    pub cutoff: f64,
}

impl BathSpec {
    pub fn new(temperature: f64, damping: f64, cutoff: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::param("temperature", temperature, "must be positive and finite"));
        }
        if !(damping >= 0.0 && damping.is_finite()) {
            return Err(Error::param("damping", damping, "must be non-negative and finite"));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::param("cutoff", cutoff, "must be positive and finite"));
        }
        Ok(Self {
            temperature,
            damping,
            cutoff,
        })
    }

    /// Builds a bath from the dimensionless ratios `k_B T/hbar omega`,
    /// `gamma/omega` and `wD/omega`.
    pub fn from_ratios(
        o: &OscillatorParams,
        reduced_temperature: f64,
        damping_ratio: f64,
        cutoff_ratio: f64,
        c: &Constants,
    ) -> Result<Self> {
        Self::new(
            c.temperature_from_reduced(reduced_temperature, o.frequency),
            damping_ratio * o.frequency,
            cutoff_ratio * o.frequency,
        )
    }

    pub fn with_damping(self, damping: f64) -> Result<Self> {
        Self::new(self.temperature, damping, self.cutoff)
    }

    /// Friction coefficient `M gamma`, the strength of the spectral density.
    pub fn friction(&self, o: &OscillatorParams) -> f64 {
        o.mass * self.damping
    }

    /// A cutoff below `10 omega` is allowed but distorts the Ohmic regime.
    pub fn cutoff_warning(&self, o: &OscillatorParams) -> Option<String> {
        (self.cutoff < 10.0 * o.frequency).then(|| {
            format!(
                "cutoff {} is below 10x the oscillator frequency {}",
                self.cutoff, o.frequency
            )
        })
    }
}

/// Which continuum evaluation to use for the moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentRoute {
    Matsubara,
    SpectralIntegral,
}

impl MomentRoute {
    /// Matsubara unless the temperature is so low that the sum gets long.
    pub fn default_for(o: &OscillatorParams, b: &BathSpec, c: &Constants) -> Self {
        if c.reduced_temperature(b.temperature, o.frequency) < MATSUBARA_MIN_REDUCED_T {
            MomentRoute::SpectralIntegral
        } else {
            MomentRoute::Matsubara
        }
    }
}

impl fmt::Display for MomentRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MomentRoute::Matsubara => "matsubara",
            MomentRoute::SpectralIntegral => "spectral_integral",
        })
    }
}

impl FromStr for MomentRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "matsubara" => Ok(MomentRoute::Matsubara),
            "spectral_integral" | "spectral" => Ok(MomentRoute::SpectralIntegral),
            other => Err(Error::Config(format!("unknown moment route `{other}`"))),
        }
    }
}

/// Thermodynamic parameter varied along a process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    Mass,
    Damping,
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parameter::Mass => "mass",
            Parameter::Damping => "damping",
        })
    }
}

impl FromStr for Parameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mass" => Ok(Parameter::Mass),
            "damping" => Ok(Parameter::Damping),
            other => Err(Error::Config(format!("unknown process parameter `{other}`"))),
        }
    }
}

/// The oscillator and bath after setting `alpha` to `value`.
///
/// A mass change leaves the bath itself untouched: the friction `M gamma`
/// (the prefactor of `J`) is held fixed, so the damping rate scales as `1/M`.
/// `omega` is held fixed in either case.
pub fn state_along(
    o: &OscillatorParams,
    b: &BathSpec,
    alpha: Parameter,
    value: f64,
) -> Result<(OscillatorParams, BathSpec)> {
    match alpha {
        Parameter::Mass => {
            let o2 = o.with_mass(value)?;
            let b2 = b.with_damping(b.friction(o) / value)?;
            Ok((o2, b2))
        }
        Parameter::Damping => Ok((*o, b.with_damping(value)?)),
    }
}

/// Current value of `alpha` for the given state.
pub fn parameter_value(o: &OscillatorParams, b: &BathSpec, alpha: Parameter) -> f64 {
    match alpha {
        Parameter::Mass => o.mass,
        Parameter::Damping => b.damping,
    }
}

/// Moments with their estimated relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub moments: Moments,
    pub rel_error: f64,
    /// Part of `rel_error` that may jump between nearby parameter values
    /// (roundoff, adaptive quadrature), as opposed to smooth truncation bias.
    pub rel_noise: f64,
}

struct DrudeKernel {
    omega2: f64,
    gamma: f64,
    cutoff: f64,
}

impl DrudeKernel {
    fn new(o: &OscillatorParams, b: &BathSpec) -> Self {
        Self {
            omega2: o.frequency * o.frequency,
            gamma: b.damping,
            cutoff: b.cutoff,
        }
    }

    /// `nu gamma^(nu)` for the Drude memory kernel at imaginary frequency.
    #[inline]
    fn memory(&self, nu: f64) -> f64 {
        nu * self.gamma * self.cutoff / (nu + self.cutoff)
    }

    #[inline]
    fn denominator(&self, nu: f64) -> f64 {
        nu * nu + self.omega2 + self.memory(nu)
    }

    /// `2 - nu D'(nu) / D(nu)`, the summand of the thermodynamic energy.
    #[inline]
    fn energy_term(&self, nu: f64) -> f64 {
        let s = nu + self.cutoff;
        let num = 2.0 * self.omega2 + 2.0 * self.memory(nu)
            - nu * self.gamma * self.cutoff * self.cutoff / (s * s);
        num / self.denominator(nu)
    }

    /// Highest frequency scale of the problem.
    fn top_scale(&self) -> f64 {
        self.omega2
            .sqrt()
            .max(self.cutoff)
            .max(self.gamma)
            .max((self.gamma * self.cutoff).sqrt())
    }
}

/// `sum_{n >= 1} g(n)`: explicit terms up to `n0`, then
/// `int_{n0+1/2}^inf g + g'(n0+1/2)/24`. The neglected `-7/5760 g'''` term is
/// the error estimate.
fn euler_maclaurin_sum<G: Fn(f64) -> f64>(g: G, n0: usize) -> Result<(f64, f64, f64)> {
    let partial: f64 = (1..=n0).rev().map(|n| g(n as f64)).sum();
    let a = n0 as f64 + 0.5;
    let tail = Integrator::with_rel_tol(1e-13).integrate_tail(&g, a)?;
    let d = 1e-3 * a;
    let g1 = (g(a + d) - g(a - d)) / (2.0 * d);
    let d3 = 0.1 * a;
    let g3 = (g(a + 2.0 * d3) - 2.0 * g(a + d3) + 2.0 * g(a - d3) - g(a - 2.0 * d3))
        / (2.0 * d3 * d3 * d3);
    let value = partial + tail.value + g1 / 24.0;
    let noise = tail.error + (n0 as f64).sqrt() * f64::EPSILON * partial.abs();
    let error = (7.0 / 5760.0 * g3).abs() + noise;
    Ok((value, error, noise))
}

fn matsubara_terms(kernel: &DrudeKernel, nu1: f64) -> usize {
    let n = (8.0 * kernel.top_scale() / nu1).ceil();
    n.clamp(64.0, 4.0e6) as usize
}

fn check_rel(what: &'static str, rel: f64, detail: impl FnOnce() -> String) -> Result<()> {
    if !(rel <= ROUTE_REL_TOL) {
        return Err(Error::numerical(
            what,
            format!("relative error estimate {rel:e} exceeds {ROUTE_REL_TOL:e}; {}", detail()),
        ));
    }
    Ok(())
}

/// Matsubara route with its error estimate.
pub fn matsubara_estimate(
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
) -> Result<MomentEstimate> {
    matsubara_with_terms(o, b, c, None)
}

/// Number of explicitly summed Matsubara terms the route would choose.
fn default_terms(o: &OscillatorParams, b: &BathSpec, c: &Constants) -> usize {
    let nu1 = 2.0 * PI * c.thermal_energy(b.temperature) / c.hbar;
    matsubara_terms(&DrudeKernel::new(o, b), nu1)
}

/// `terms` pins the split between explicit sum and tail, so that nearby
/// parameter values are summed identically (no jumps under differencing).
fn matsubara_with_terms(
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    terms: Option<usize>,
) -> Result<MomentEstimate> {
    if b.damping == 0.0 {
        // The sums are then those of the coth expansion.
        return Ok(MomentEstimate {
            moments: thermal_moments_decoupled(o, b.temperature, c)?,
            rel_error: 4.0 * f64::EPSILON,
            rel_noise: 4.0 * f64::EPSILON,
        });
    }
    let kernel = DrudeKernel::new(o, b);
    let kt = c.thermal_energy(b.temperature);
    let nu1 = 2.0 * PI * kt / c.hbar;
    let n0 = terms.unwrap_or_else(|| matsubara_terms(&kernel, nu1));
    let (s1, e1, j1) = euler_maclaurin_sum(|x| 1.0 / kernel.denominator(nu1 * x), n0)?;
    let (s2, e2, j2) = euler_maclaurin_sum(
        |x| {
            let nu = nu1 * x;
            (kernel.omega2 + kernel.memory(nu)) / kernel.denominator(nu)
        },
        n0,
    )?;
    let b1 = 1.0 / kernel.omega2 + 2.0 * s1;
    let b2 = 1.0 + 2.0 * s2;
    let rel = (2.0 * e1 / b1).max(2.0 * e2 / b2);
    check_rel("matsubara sum", rel, || {
        format!("{n0} explicit terms, tail errors ({e1:e}, {e2:e})")
    })?;
    let moments = Moments::new(kt / o.mass * b1, o.mass * kt * b2, 0.0)?;
    Ok(MomentEstimate {
        moments,
        rel_error: rel,
        rel_noise: (2.0 * j1 / b1).max(2.0 * j2 / b2),
    })
}

/// `f1 = (k_B T / M) sum_n 1/D_n`, `f2 = M k_B T sum_n (omega^2 + |nu_n| gamma^(|nu_n|))/D_n`
/// with `D_n = nu_n^2 + omega^2 + |nu_n| gamma^(|nu_n|)`.
pub fn moments_matsubara(o: &OscillatorParams, b: &BathSpec, c: &Constants) -> Result<Moments> {
    matsubara_estimate(o, b, c).map(|m| m.moments)
}

/// Im chi(u) for the Drude bath at real frequency `u`.
fn im_susceptibility(u: f64, mass: f64, kernel: &DrudeKernel) -> f64 {
    let wd2 = kernel.cutoff * kernel.cutoff;
    let lorentz = wd2 / (wd2 + u * u);
    let re = kernel.omega2 - u * u + kernel.gamma * kernel.cutoff * u * u / (wd2 + u * u);
    let im = kernel.gamma * u * lorentz;
    im / (mass * (re * re + im * im))
}

fn spectral_breakpoints(o: &OscillatorParams, b: &BathSpec, kt_over_hbar: f64, upper: f64) -> Vec<f64> {
    let w = o.frequency;
    let mut pts = vec![w, b.cutoff, 2.0 * PI * kt_over_hbar, 10.0 * kt_over_hbar];
    if b.damping > 0.0 {
        pts.push(b.damping);
        pts.push(w * w / b.damping);
        let half_width = 0.5 * b.damping * b.cutoff * b.cutoff / (b.cutoff * b.cutoff + w * w);
        let mut s = half_width;
        while s < 0.25 * w {
            pts.push(w - s);
            pts.push(w + s);
            s *= 4.0;
        }
    }
    pts.retain(|&p| p > 0.0 && p < upper);
    pts.push(0.0);
    pts.push(upper);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    pts
}

/// Fluctuation-dissipation route with its error estimate.
pub fn spectral_estimate(
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
) -> Result<MomentEstimate> {
    spectral_estimate_tol(o, b, c, 1e-10)
}

fn spectral_estimate_tol(
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    rel_tol: f64,
) -> Result<MomentEstimate> {
    if b.damping == 0.0 {
        // The Lorentzian collapses to (pi / 2 M omega) delta(u - omega).
        let m = thermal_moments_decoupled(o, b.temperature, c)?;
        return Ok(MomentEstimate {
            moments: m,
            rel_error: f64::EPSILON,
            rel_noise: f64::EPSILON,
        });
    }
    let kernel = DrudeKernel::new(o, b);
    let kt_over_hbar = c.thermal_energy(b.temperature) / c.hbar;
    let upper = 20.0 * kernel.top_scale().max(kt_over_hbar);
    let pts = spectral_breakpoints(o, b, kt_over_hbar, upper);
    let integ = Integrator::with_rel_tol(rel_tol);
    let occupation = |u: f64| coth(u / (2.0 * kt_over_hbar));
    let g1 = |u: f64| occupation(u) * im_susceptibility(u, o.mass, &kernel);
    let g2 = |u: f64| u * u * g1(u);
    let mut parts = [(0.0, 0.0); 2];
    for (k, slot) in parts.iter_mut().enumerate() {
        let f = |u: f64| if k == 0 { g1(u) } else { g2(u) };
        let head = integ.integrate(f, &pts)?;
        let tail = integ.integrate_tail(f, upper)?;
        *slot = (head.value + tail.value, head.error + tail.error);
    }
    let pref = c.hbar / PI;
    let f1 = pref * parts[0].0;
    let f2 = pref * o.mass * o.mass * parts[1].0;
    let rel = (parts[0].1 / parts[0].0).max(parts[1].1 / parts[1].0);
    check_rel("spectral integral", rel, || {
        format!("{} breakpoints up to {upper:e}", pts.len())
    })?;
    Ok(MomentEstimate {
        moments: Moments::new(f1, f2, 0.0)?,
        rel_error: rel,
        rel_noise: rel,
    })
}

/// `f1 = (hbar/pi) int_0^inf coth(hbar u / 2 k_B T) Im chi(u) du`,
/// `f2 = (hbar M^2/pi) int_0^inf u^2 coth(hbar u / 2 k_B T) Im chi(u) du`.
///
/// `gamma = 0` returns the exact collapse of the integrand onto the resonance.
pub fn moments_spectral(o: &OscillatorParams, b: &BathSpec, c: &Constants) -> Result<Moments> {
    spectral_estimate(o, b, c).map(|m| m.moments)
}

pub fn moments_estimate(
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    route: MomentRoute,
) -> Result<MomentEstimate> {
    match route {
        MomentRoute::Matsubara => matsubara_estimate(o, b, c),
        MomentRoute::SpectralIntegral => spectral_estimate(o, b, c),
    }
}

pub fn moments(
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    route: MomentRoute,
) -> Result<Moments> {
    moments_estimate(o, b, c, route).map(|m| m.moments)
}

/// Thermodynamic energy of the damped oscillator, `-d/d beta ln(Z_total / Z_bath)`,
/// i.e. total energy of the coupled Gibbs state minus that of the free bath.
pub fn thermodynamic_energy(o: &OscillatorParams, b: &BathSpec, c: &Constants) -> Result<(f64, f64)> {
    let kernel = DrudeKernel::new(o, b);
    let kt = c.thermal_energy(b.temperature);
    let nu1 = 2.0 * PI * kt / c.hbar;
    let n0 = matsubara_terms(&kernel, nu1);
    let (s, e, _) = euler_maclaurin_sum(|x| kernel.energy_term(nu1 * x), n0)?;
    Ok((kt * (1.0 + s), kt * e))
}

/// Heat with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatEstimate {
    pub value: f64,
    pub error: f64,
}

/// Heat received from the bath while the coupling is switched on from zero
/// to `b.damping` at fixed `M`, `omega`, `T`: minus the change of the bath
/// energy between the product Gibbs state and the coupled Gibbs state.
///
/// Uses the stationarity identity `<H_ob> = f2/M - (M omega^2 + M gamma wD / 2) f1`
/// and the partition-function energy, giving
/// `Q = 3 f2 / 2M - (M omega^2 + M gamma wD) f1 / 2 - U_thermo`.
pub fn coupling_heat(o: &OscillatorParams, b: &BathSpec, c: &Constants) -> Result<HeatEstimate> {
    if b.damping == 0.0 {
        return Ok(HeatEstimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let est = matsubara_estimate(o, b, c)?;
    let m = est.moments;
    let (u, u_err) = thermodynamic_energy(o, b, c)?;
    let counter = 0.5 * o.mass * b.damping * b.cutoff;
    let a = 1.5 * m.f2 / o.mass;
    let bterm = (0.5 * o.stiffness() + counter) * m.f1;
    let value = a - bterm - u;
    let error = est.rel_error * (a.abs() + bterm.abs()) + u_err + 4.0 * f64::EPSILON * (a.abs() + bterm.abs() + u.abs());
    Ok(HeatEstimate { value, error })
}

/// `(df1/d alpha, df2/d alpha)` with error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentDerivatives {
    pub df1: f64,
    pub df2: f64,
    pub err1: f64,
    pub err2: f64,
}

/// Finite-difference step at parameter value `alpha`, never below `1e-3 floor`.
pub fn derivative_step(alpha: f64, floor: f64) -> f64 {
    1e-3 * alpha.abs().max(floor)
}

/// Smallest step scale for `alpha`: damping may sit at or near zero, where
/// a step relative to its value would amplify evaluation noise.
fn step_floor(o: &OscillatorParams, alpha: Parameter) -> f64 {
    match alpha {
        Parameter::Mass => 0.0,
        Parameter::Damping => 0.1 * o.frequency,
    }
}

/// Derivatives of the moments along `alpha` (mass at fixed friction, or
/// damping at fixed mass). Central differences with one Richardson step;
/// forward differences at `alpha = 0`.
pub fn moment_derivatives(
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    alpha: Parameter,
    route: MomentRoute,
) -> Result<MomentDerivatives> {
    let a0 = parameter_value(o, b, alpha);
    let h = derivative_step(a0, step_floor(o, alpha));
    let terms = default_terms(o, b, c);
    let eval = |value: f64| -> Result<MomentEstimate> {
        let (o2, b2) = state_along(o, b, alpha, value)?;
        match route {
            MomentRoute::Matsubara => matsubara_with_terms(&o2, &b2, c, Some(terms)),
            MomentRoute::SpectralIntegral => spectral_estimate(&o2, &b2, c),
        }
    };
    let central = a0 - h > 0.0;
    let mut bias: f64 = 0.0;
    let mut jitter: f64 = 4.0 * f64::EPSILON;
    let mut scale: (f64, f64) = (0.0, 0.0);
    let mut at = |value: f64| -> Result<(f64, f64)> {
        let e = eval(value)?;
        bias = bias.max(e.rel_error);
        jitter = jitter.max(e.rel_noise);
        scale = (scale.0.max(e.moments.f1.abs()), scale.1.max(e.moments.f2.abs()));
        Ok((e.moments.f1, e.moments.f2))
    };
    // Second-order differences at steps h, h/2, h/4.
    let mut diffs = [(0.0, 0.0); 3];
    if central {
        for (k, d) in diffs.iter_mut().enumerate() {
            let s = h / (1 << k) as f64;
            let (p, m) = (at(a0 + s)?, at(a0 - s)?);
            *d = ((p.0 - m.0) / (2.0 * s), (p.1 - m.1) / (2.0 * s));
        }
    } else {
        let f0 = at(a0)?;
        let mut f = [(0.0, 0.0); 5];
        for (k, v) in f.iter_mut().enumerate() {
            // a0 + h/4, h/2, h, 2h (index 3 unused).
            if k != 3 {
                *v = at(a0 + h * [0.25, 0.5, 1.0, 0.0, 2.0][k])?;
            }
        }
        let fwd = |x1: f64, x2: f64, s: f64, x0: f64| (-3.0 * x0 + 4.0 * x1 - x2) / (2.0 * s);
        for (k, d) in diffs.iter_mut().enumerate() {
            let s = h / (1 << k) as f64;
            let (near, far) = match k {
                0 => (f[2], f[4]),
                1 => (f[1], f[2]),
                _ => (f[0], f[1]),
            };
            *d = (fwd(near.0, far.0, s, f0.0), fwd(near.1, far.1, s, f0.1));
        }
    }
    let rich = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
    let r1 = (rich(diffs[0].0, diffs[1].0), rich(diffs[0].1, diffs[1].1));
    let df1 = rich(diffs[1].0, diffs[2].0);
    let df2 = rich(diffs[1].1, diffs[2].1);
    // Two successive extrapolations, jitter amplified by the smallest step,
    // and the smooth truncation bias of the route varying on the scale of alpha.
    let a_scale = 1e3 * h;
    let noise_err = |s: f64| 8.0 * jitter * s / h + bias * s / a_scale;
    let err1 = (df1 - r1.0).abs() + noise_err(scale.0);
    let err2 = (df2 - r1.1).abs() + noise_err(scale.1);
    for (what, d, e, s) in [("df1", df1, err1, scale.0), ("df2", df2, err2, scale.1)] {
        let reference = d.abs().max(1e-6 * s / a0.abs().max(h));
        if !(e <= DERIVATIVE_REL_TOL * reference) {
            return Err(Error::numerical(
                "moment derivative",
                format!("{what}/d{alpha} = {d:e} with error estimate {e:e} at {alpha} = {a0}"),
            ));
        }
    }
    Ok(MomentDerivatives {
        df1,
        df2,
        err1,
        err2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::symplectic_param;

    const C: Constants = Constants::NATURAL;

    fn bath(t: f64, g: f64, wd: f64) -> BathSpec {
        BathSpec::new(t, g, wd).unwrap()
    }

    #[test]
    fn rejects_invalid_baths() {
        assert!(BathSpec::new(0.0, 1.0, 10.0).is_err());
        assert!(BathSpec::new(1.0, -1.0, 10.0).is_err());
        assert!(BathSpec::new(1.0, 1.0, 0.0).is_err());
        let o = OscillatorParams::unit();
        assert!(bath(1.0, 1.0, 5.0).cutoff_warning(&o).is_some());
        assert!(bath(1.0, 1.0, 50.0).cutoff_warning(&o).is_none());
    }

    #[test]
    fn matsubara_decoupled_limit_is_exact() {
        for (m, w) in [(1.0, 1.0), (2.5, 0.4)] {
            let o = OscillatorParams::new(m, w).unwrap();
            for tr in [0.02, 0.05, 1.0, 20.0] {
                let t = C.temperature_from_reduced(tr, w);
                let got = moments_matsubara(&o, &bath(t, 0.0, 50.0 * w), &C).unwrap();
                let want = thermal_moments_decoupled(&o, t, &C).unwrap();
                assert!(got.max_rel_diff(&want) < 1e-10, "T~={tr}: {got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn high_temperature_position_variance_is_classical() {
        let o = OscillatorParams::unit();
        let m = moments_matsubara(&o, &bath(10.0, 1.0, 50.0), &C).unwrap();
        assert!((m.f1 / 10.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn strong_coupling_squeezes_position() {
        let o = OscillatorParams::unit();
        let t = 0.05;
        let free = thermal_moments_decoupled(&o, t, &C).unwrap();
        for route in [MomentRoute::Matsubara, MomentRoute::SpectralIntegral] {
            let m = moments(&o, &bath(t, 10.0, 100.0), &C, route).unwrap();
            assert!(m.f1 < free.f1 && m.f2 > free.f2, "{route}: {m:?}");
        }
    }

    #[test]
    fn spectral_small_damping_matches_decoupled() {
        let o = OscillatorParams::unit();
        for t in [0.05, 1.0, 20.0] {
            let want = thermal_moments_decoupled(&o, t, &C).unwrap();
            let got = moments_spectral(&o, &bath(t, 1e-6, 50.0), &C).unwrap();
            assert!(got.max_rel_diff(&want) < 1e-4, "T={t}: {got:?}");
            let exact = moments_spectral(&o, &bath(t, 0.0, 50.0), &C).unwrap();
            assert_eq!(exact, want);
        }
    }

    #[test]
    fn routes_agree_on_sample_points() {
        let o = OscillatorParams::new(1.3, 0.8).unwrap();
        for (tr, gr, wr) in [(0.05, 5.0, 50.0), (0.2, 0.1, 200.0), (1.0, 1.0, 50.0), (20.0, 10.0, 200.0)] {
            let b = BathSpec::from_ratios(&o, tr, gr, wr, &C).unwrap();
            let a = moments_matsubara(&o, &b, &C).unwrap();
            let s = moments_spectral(&o, &b, &C).unwrap();
            assert!(a.max_rel_diff(&s) < 1e-7, "{tr} {gr} {wr}: {a:?} vs {s:?}");
        }
    }

    #[test]
    fn momentum_variance_grows_with_cutoff() {
        let o = OscillatorParams::unit();
        let f2: Vec<f64> = [50.0, 100.0, 200.0]
            .iter()
            .map(|&wd| moments_spectral(&o, &bath(0.05, 10.0, wd), &C).unwrap().f2)
            .collect();
        assert!(f2[0] < f2[1] && f2[1] < f2[2], "{f2:?}");
    }

    #[test]
    fn position_variance_non_increasing_in_damping_at_low_t() {
        let o = OscillatorParams::unit();
        for wd in STANDARD_CUTOFFS {
            let mut prev = f64::INFINITY;
            for g in STANDARD_DAMPINGS {
                let f1 = moments_matsubara(&o, &bath(0.05, g, wd), &C).unwrap().f1;
                assert!(f1 <= prev, "gamma = {g}, wD = {wd}");
                prev = f1;
            }
        }
    }

    #[test]
    fn decoupled_mass_derivatives() {
        let o = OscillatorParams::new(1.5, 1.0).unwrap();
        let b = bath(0.3, 0.0, 50.0);
        let m = moments_matsubara(&o, &b, &C).unwrap();
        let d = moment_derivatives(&o, &b, &C, Parameter::Mass, MomentRoute::Matsubara).unwrap();
        assert!((d.df1 + m.f1 / o.mass).abs() < 1e-8 * m.f1);
        assert!((d.df2 - m.f2 / o.mass).abs() < 1e-8 * m.f2);
    }

    #[test]
    fn damping_derivative_at_zero_is_negative_for_position() {
        let o = OscillatorParams::unit();
        let d = moment_derivatives(&o, &bath(0.05, 0.0, 100.0), &C, Parameter::Damping, MomentRoute::Matsubara)
            .unwrap();
        assert!(d.df1 < 0.0 && d.df2 > 0.0, "{d:?}");
        let d = moment_derivatives(&o, &bath(0.05, 1e-3, 100.0), &C, Parameter::Damping, MomentRoute::Matsubara)
            .unwrap();
        assert!(d.df1 < 0.0);
    }

    #[test]
    fn richardson_within_error_bar_of_five_point_stencil() {
        let o = OscillatorParams::unit();
        for (alpha, b) in [(Parameter::Mass, bath(0.05, 5.0, 100.0)), (Parameter::Damping, bath(1.0, 1.0, 50.0))] {
            let d = moment_derivatives(&o, &b, &C, alpha, MomentRoute::Matsubara).unwrap();
            let a0 = parameter_value(&o, &b, alpha);
            let h = 2.0 * derivative_step(a0, 0.0);
            let f = |v: f64| {
                let (o2, b2) = state_along(&o, &b, alpha, v).unwrap();
                moments_matsubara(&o2, &b2, &C).unwrap()
            };
            let (p2, p1, m1, m2) = (f(a0 + 2.0 * h), f(a0 + h), f(a0 - h), f(a0 - 2.0 * h));
            let five = |g: fn(&Moments) -> f64| (-g(&p2) + 8.0 * g(&p1) - 8.0 * g(&m1) + g(&m2)) / (12.0 * h);
            assert!((five(|m| m.f1) - d.df1).abs() <= d.err1, "{alpha}: {d:?}");
            assert!((five(|m| m.f2) - d.df2).abs() <= d.err2, "{alpha}: {d:?}");
        }
    }

    #[test]
    fn coupling_heat_vanishes_without_coupling_and_is_released_otherwise() {
        let o = OscillatorParams::unit();
        assert_eq!(coupling_heat(&o, &bath(0.05, 0.0, 100.0), &C).unwrap().value, 0.0);
        let tiny = coupling_heat(&o, &bath(0.05, 1e-9, 100.0), &C).unwrap();
        assert!(tiny.value.abs() < 1e-6, "{tiny:?}");
        let q = coupling_heat(&o, &bath(0.05, 5.0, 100.0), &C).unwrap();
        assert!(q.value < 0.0);
    }

    #[test]
    fn thermodynamic_energy_decoupled() {
        let o = OscillatorParams::unit();
        for t in [0.05, 1.0, 20.0] {
            let (u, _) = thermodynamic_energy(&o, &bath(t, 0.0, 50.0), &C).unwrap();
            assert!((u / (0.5 * coth(0.5 / t)) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn coupled_state_is_more_mixed() {
        let o = OscillatorParams::unit();
        let free = symplectic_param(&thermal_moments_decoupled(&o, 0.05, &C).unwrap(), &C).unwrap();
        let m = moments_matsubara(&o, &bath(0.05, 1.0, 50.0), &C).unwrap();
        assert!(symplectic_param(&m, &C).unwrap() > free);
    }

    #[test]
    fn default_route_switches_at_low_temperature() {
        let o = OscillatorParams::unit();
        assert_eq!(MomentRoute::default_for(&o, &bath(0.01, 1.0, 50.0), &C), MomentRoute::SpectralIntegral);
        assert_eq!(MomentRoute::default_for(&o, &bath(0.05, 1.0, 50.0), &C), MomentRoute::Matsubara);
        assert_eq!("spectral_integral".parse::<MomentRoute>().unwrap(), MomentRoute::SpectralIntegral);
        assert!("foo".parse::<Parameter>().is_err());
    }
}
