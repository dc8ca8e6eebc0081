//! Entropy change and heat along quasi-static parameter paths, the
//! Clausius check, and the two-step (couple, then change mass) process.

use rayon::prelude::*;

use crate::bath::{
    coupling_heat, moment_derivatives, moments_estimate, parameter_value, state_along, BathSpec,
    MomentDerivatives, MomentRoute, Parameter,
};
use crate::error::{Error, Result};
use crate::gaussian::{entropy, entropy_slope, mean_energy, symplectic_param, Moments, OscillatorParams};
use crate::quadrature::{cumulative, simpson_with_estimate, Integrator};
use crate::units::Constants;

/// Tolerance on `k_B T dS - Q` below zero before Clausius counts as violated.
pub const CLAUSIUS_TOL: f64 = 1e-9;

/// Largest accepted gap between the endpoint and the quadrature entropy change.
pub const ENTROPY_FORMS_TOL: f64 = 1e-5;

/// Heat quadrature must be good to this fraction of `|Q|` ...
pub const HEAT_REL_TOL: f64 = 1e-4;
/// ... or this absolute value when `Q` is essentially zero.
pub const HEAT_ABS_TOL: f64 = 1e-8;

/// Default path resolution; `4k + 1` nodes keep the half grid Simpson-exact.
pub const DEFAULT_GRID_POINTS: usize = 17;

/// A quasi-static change of `parameter` from `start_value` to `end_value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessPath {
    pub parameter: Parameter,
    pub start_value: f64,
    pub end_value: f64,
    pub grid_points: usize,
}

impl ProcessPath {
    pub fn new(parameter: Parameter, start_value: f64, end_value: f64, grid_points: usize) -> Result<Self> {
        if grid_points < 9 || grid_points.is_multiple_of(2) {
            return Err(Error::param(
                "grid_points",
                grid_points as f64,
                "must be odd and at least 9",
            ));
        }
        for v in [start_value, end_value] {
            let ok = match parameter {
                Parameter::Mass => v > 0.0 && v.is_finite(),
                Parameter::Damping => v >= 0.0 && v.is_finite(),
            };
            if !ok {
                return Err(Error::param("path endpoint", v, "outside the parameter's domain"));
            }
        }
        Ok(Self {
            parameter,
            start_value,
            end_value,
            grid_points,
        })
    }

    pub fn is_null(&self) -> bool {
        self.start_value == self.end_value
    }

    /// Mass paths are sampled uniformly in `ln M`, which keeps the heat
    /// integrand smooth over large mass ratios; damping paths may start at
    /// zero and are sampled uniformly.
    pub fn is_logarithmic(&self) -> bool {
        self.parameter == Parameter::Mass
    }

    /// Node spacing in the integration variable (`alpha` or `ln alpha`).
    pub fn step(&self) -> f64 {
        let span = if self.is_logarithmic() {
            (self.end_value / self.start_value).ln()
        } else {
            self.end_value - self.start_value
        };
        span / (self.grid_points - 1) as f64
    }

    /// `d alpha / du` for the integration variable `u`.
    pub fn jacobian(&self, alpha: f64) -> f64 {
        if self.is_logarithmic() {
            alpha
        } else {
            1.0
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        let last = self.grid_points - 1;
        (0..self.grid_points)
            .map(|i| match i {
                0 => self.start_value,
                i if i == last => self.end_value,
                i if self.is_logarithmic() => self.start_value * (i as f64 * h).exp(),
                i => self.start_value + i as f64 * h,
            })
            .collect()
    }

    /// Same path on `2 (n - 1) + 1` nodes.
    pub fn refined(&self) -> Self {
        Self {
            grid_points: 2 * self.grid_points - 1,
            ..*self
        }
    }
}

/// `k_B T dS - Q` and whether it clears `-CLAUSIUS_TOL`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClausiusCheck {
    pub slack: f64,
    pub satisfied: bool,
}

pub fn clausius_check(heat: f64, delta_entropy: f64, temperature: f64, c: &Constants) -> ClausiusCheck {
    let slack = c.thermal_energy(temperature) * delta_entropy - heat;
    ClausiusCheck {
        slack,
        satisfied: slack >= -CLAUSIUS_TOL,
    }
}

/// Outcome of one process step (or a sum of steps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    pub delta_entropy: f64,
    pub heat: f64,
    pub heat_error: f64,
    /// Change of the oscillator's mean energy `<H_o>` minus the heat.
    pub work_like_balance: f64,
    pub clausius_satisfied: bool,
    pub slack: f64,
}

impl ThermoReport {
    fn new(delta_entropy: f64, heat: f64, heat_error: f64, du: f64, t: f64, c: &Constants) -> Self {
        let check = clausius_check(heat, delta_entropy, t, c);
        Self {
            delta_entropy,
            heat,
            heat_error,
            work_like_balance: du - heat,
            clausius_satisfied: check.satisfied,
            slack: check.slack,
        }
    }

    fn null() -> Self {
        Self {
            delta_entropy: 0.0,
            heat: 0.0,
            heat_error: 0.0,
            work_like_balance: 0.0,
            clausius_satisfied: true,
            slack: 0.0,
        }
    }

    /// Apparent violation: entropy down while heat flows in.
    pub fn is_apparent_violation(&self) -> bool {
        self.delta_entropy < 0.0 && self.heat > 0.0 && !self.clausius_satisfied
    }
}

/// Both evaluations of an entropy change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyChange {
    /// `S(alpha_1) - S(alpha_0)`; authoritative.
    pub endpoint: f64,
    /// `int S'(v) dv/d alpha d alpha`.
    pub quadrature: f64,
    pub quadrature_error: f64,
}

/// Heat with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatResult {
    pub value: f64,
    pub error: f64,
    /// Richardson part of `error` (grid against half grid).
    pub quadrature_error: f64,
}

fn route_for(o: &OscillatorParams, b: &BathSpec, c: &Constants) -> MomentRoute {
    MomentRoute::default_for(o, b, c)
}

fn moments_at(
    path: &ProcessPath,
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    route: MomentRoute,
    alpha: f64,
) -> Result<(OscillatorParams, BathSpec, Moments)> {
    let (o2, b2) = state_along(o, b, path.parameter, alpha)?;
    let m = moments_estimate(&o2, &b2, c, route)?.moments;
    Ok((o2, b2, m))
}

fn check_start(path: &ProcessPath, o: &OscillatorParams, b: &BathSpec) -> Result<()> {
    let here = parameter_value(o, b, path.parameter);
    if here != path.start_value {
        return Err(Error::InvalidState(format!(
            "path starts at {} = {} but the state has {}",
            path.parameter, path.start_value, here
        )));
    }
    Ok(())
}

/// `dS/d alpha` at `alpha` via `S'(v) dv/d alpha`.
fn entropy_rate(
    path: &ProcessPath,
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    route: MomentRoute,
    alpha: f64,
) -> Result<f64> {
    let (o2, b2) = state_along(o, b, path.parameter, alpha)?;
    let m = moments_estimate(&o2, &b2, c, route)?.moments;
    let d = moment_derivatives(&o2, &b2, c, path.parameter, route)?;
    let v = symplectic_param(&m, c)?;
    let dv = (m.f2 * d.df1 + m.f1 * d.df2) / (2.0 * c.hbar * c.hbar * v.value());
    Ok(entropy_slope(v) * dv)
}

/// Entropy change of the reduced oscillator state along `path`, which must
/// start at the state described by `o`, `b`.
pub fn entropy_change(path: &ProcessPath, o: &OscillatorParams, b: &BathSpec, c: &Constants) -> Result<EntropyChange> {
    check_start(path, o, b)?;
    if path.is_null() {
        return Ok(EntropyChange {
            endpoint: 0.0,
            quadrature: 0.0,
            quadrature_error: 0.0,
        });
    }
    let route = route_for(o, b, c);
    let s = |alpha: f64| -> Result<f64> {
        let (_, _, m) = moments_at(path, o, b, c, route, alpha)?;
        Ok(entropy(symplectic_param(&m, c)?))
    };
    let endpoint = s(path.end_value)? - s(path.start_value)?;

    // The integrand is evaluated inside a closure that cannot return errors;
    // the first failure is parked and re-raised.
    let failure = std::sync::Mutex::new(None);
    let integrand = |alpha: f64| match entropy_rate(path, o, b, c, route, alpha) {
        Ok(r) => r,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            0.0
        }
    };
    let (lo, hi, sign) = if path.end_value > path.start_value {
        (path.start_value, path.end_value, 1.0)
    } else {
        (path.end_value, path.start_value, -1.0)
    };
    let integrator = Integrator {
        rel_tol: 1e-8,
        abs_tol: 1e-9,
        ..Integrator::default()
    };
    let q = integrator.integrate(integrand, &[lo, hi]);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let q = q?;
    let out = EntropyChange {
        endpoint,
        quadrature: sign * q.value,
        quadrature_error: q.error,
    };
    if !((out.endpoint - out.quadrature).abs() <= ENTROPY_FORMS_TOL) {
        return Err(Error::numerical(
            "entropy change",
            format!(
                "endpoint form {:e} and quadrature form {:e} differ by more than {ENTROPY_FORMS_TOL:e}",
                out.endpoint, out.quadrature
            ),
        ));
    }
    Ok(out)
}

/// State and heat integrand at one node of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathNode {
    pub alpha: f64,
    pub moments: Moments,
    pub symplectic: f64,
    pub entropy: f64,
    pub mean_energy: f64,
    /// `(1/2M) df2/d alpha + (M omega^2/2) df1/d alpha`.
    pub heat_rate: f64,
    pub heat_rate_error: f64,
}

fn path_node(
    path: &ProcessPath,
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    route: MomentRoute,
    alpha: f64,
) -> Result<PathNode> {
    let (o2, b2, m) = moments_at(path, o, b, c, route, alpha)?;
    let d: MomentDerivatives = moment_derivatives(&o2, &b2, c, path.parameter, route)?;
    let v = symplectic_param(&m, c)?;
    let a = 0.5 / o2.mass;
    let k = 0.5 * o2.stiffness();
    Ok(PathNode {
        alpha,
        moments: m,
        symplectic: v.value(),
        entropy: entropy(v),
        mean_energy: mean_energy(&m, &o2),
        heat_rate: a * d.df2 + k * d.df1,
        heat_rate_error: a * d.err2 + k * d.err1,
    })
}

/// All nodes of `path`, evaluated in parallel, in path order.
pub fn path_profile(path: &ProcessPath, o: &OscillatorParams, b: &BathSpec, c: &Constants) -> Result<Vec<PathNode>> {
    check_start(path, o, b)?;
    let route = route_for(o, b, c);
    path.nodes()
        .par_iter()
        .map(|&alpha| path_node(path, o, b, c, route, alpha))
        .collect()
}

/// Running heat from the start of the path to each node.
pub fn cumulative_heat(path: &ProcessPath, nodes: &[PathNode]) -> Vec<f64> {
    let rates: Vec<f64> = nodes.iter().map(|n| n.heat_rate * path.jacobian(n.alpha)).collect();
    cumulative(&rates, path.step())
}

fn heat_from_nodes(path: &ProcessPath, nodes: &[PathNode]) -> Result<HeatResult> {
    let h = path.step();
    let rates: Vec<f64> = nodes.iter().map(|n| n.heat_rate * path.jacobian(n.alpha)).collect();
    let q = simpson_with_estimate(&rates, h);
    // Propagated derivative errors, weighted like the rule itself.
    let errs: Vec<f64> = nodes.iter().map(|n| n.heat_rate_error * path.jacobian(n.alpha)).collect();
    let propagated = crate::quadrature::simpson(&errs, h.abs());
    let error = q.error + propagated;
    let allowed = (HEAT_REL_TOL * q.value.abs()).max(HEAT_ABS_TOL);
    if !(error <= allowed) {
        return Err(Error::numerical(
            "heat quadrature",
            format!(
                "Q = {:e} with error estimate {error:e} above {allowed:e} on {} nodes",
                q.value, path.grid_points
            ),
        ));
    }
    Ok(HeatResult {
        value: q.value,
        error,
        quadrature_error: q.error,
    })
}

/// Heat received by the oscillator along `path` (Simpson over the nodes).
pub fn heat(path: &ProcessPath, o: &OscillatorParams, b: &BathSpec, c: &Constants) -> Result<HeatResult> {
    if path.is_null() {
        check_start(path, o, b)?;
        return Ok(HeatResult {
            value: 0.0,
            error: 0.0,
            quadrature_error: 0.0,
        });
    }
    let nodes = path_profile(path, o, b, c)?;
    heat_from_nodes(path, &nodes)
}

/// Entropy change and heat for a general path.
pub fn process(path: &ProcessPath, o: &OscillatorParams, b: &BathSpec, c: &Constants) -> Result<ThermoReport> {
    if path.is_null() {
        check_start(path, o, b)?;
        return Ok(ThermoReport::null());
    }
    let ds = entropy_change(path, o, b, c)?;
    let nodes = path_profile(path, o, b, c)?;
    let q = heat_from_nodes(path, &nodes)?;
    let du = nodes[nodes.len() - 1].mean_energy - nodes[0].mean_energy;
    Ok(ThermoReport::new(ds.endpoint, q.value, q.error, du, b.temperature, c))
}

/// Mass change `M -> mass_factor M` at fixed `omega` and fixed friction `M gamma`.
pub fn mass_process(
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    mass_factor: f64,
    grid_points: usize,
) -> Result<ThermoReport> {
    if !(mass_factor > 0.0 && mass_factor.is_finite()) {
        return Err(Error::param("mass_factor", mass_factor, "must be positive"));
    }
    let path = ProcessPath::new(Parameter::Mass, o.mass, o.mass * mass_factor, grid_points)?;
    process(&path, o, b, c)
}

/// Switching the bath on, from damping 0 to `b_target.damping`, at fixed
/// `M`, `omega`, `T`.
///
/// The entropy change follows the reduced state along the damping path. The
/// heat is the energy the bath gives up between the product Gibbs state and
/// the coupled one; what flows into the oscillator alone would not account
/// for the interaction energy that the coupling stores.
pub fn coupling_process(
    o: &OscillatorParams,
    b_target: &BathSpec,
    c: &Constants,
) -> Result<ThermoReport> {
    let b0 = b_target.with_damping(0.0)?;
    if b_target.damping == 0.0 {
        return Ok(ThermoReport::null());
    }
    let path = ProcessPath::new(Parameter::Damping, 0.0, b_target.damping, DEFAULT_GRID_POINTS)?;
    let ds = entropy_change(&path, o, &b0, c)?;
    let q = coupling_heat(o, b_target, c)?;
    let route = route_for(o, b_target, c);
    let u0 = mean_energy(&moments_estimate(o, &b0, c, route)?.moments, o);
    let u1 = mean_energy(&moments_estimate(o, b_target, c, route)?.moments, o);
    Ok(ThermoReport::new(ds.endpoint, q.value, q.error, u1 - u0, b_target.temperature, c))
}

/// The steps of the two-step process and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposedReport {
    pub coupling: ThermoReport,
    pub mass: ThermoReport,
    pub total: ThermoReport,
}

/// Couple the initially free oscillator to the bath, then change its mass.
pub fn composed_process(
    o: &OscillatorParams,
    b: &BathSpec,
    c: &Constants,
    mass_factor: f64,
    grid_points: usize,
) -> Result<ComposedReport> {
    let coupling = coupling_process(o, b, c)?;
    let mass = mass_process(o, b, c, mass_factor, grid_points)?;
    let ds = coupling.delta_entropy + mass.delta_entropy;
    let q = coupling.heat + mass.heat;
    let du = coupling.work_like_balance + coupling.heat + mass.work_like_balance + mass.heat;
    let total = ThermoReport::new(ds, q, coupling.heat_error + mass.heat_error, du, b.temperature, c);
    Ok(ComposedReport {
        coupling,
        mass,
        total,
    })
}

/// Minimal heat released when erasing a state of entropy `entropy` at `temperature`.
pub fn landauer_bound(entropy: f64, temperature: f64, c: &Constants) -> Result<f64> {
    if !(entropy >= 0.0 && entropy.is_finite()) {
        return Err(Error::param("entropy", entropy, "must be non-negative"));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::param("temperature", temperature, "must be positive"));
    }
    Ok(c.thermal_energy(temperature) * entropy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SymplecticParam;

    const C: Constants = Constants::NATURAL;

    fn strong() -> (OscillatorParams, BathSpec) {
        let o = OscillatorParams::unit();
        (o, BathSpec::from_ratios(&o, 0.05, 5.0, 100.0, &C).unwrap())
    }

    #[test]
    fn path_validation() {
        assert!(ProcessPath::new(Parameter::Mass, 1.0, 2.0, 8).is_err());
        assert!(ProcessPath::new(Parameter::Mass, 1.0, 2.0, 7).is_err());
        assert!(ProcessPath::new(Parameter::Mass, 0.0, 2.0, 9).is_err());
        assert!(ProcessPath::new(Parameter::Damping, 0.0, 2.0, 9).is_ok());
        assert!(ProcessPath::new(Parameter::Damping, -1.0, 2.0, 9).is_err());
        let p = ProcessPath::new(Parameter::Mass, 2.0, 1.0, 9).unwrap();
        assert_eq!(p.nodes().len(), 9);
        assert_eq!(p.nodes()[8], 1.0);
        assert_eq!(p.refined().grid_points, 17);
    }

    #[test]
    fn clausius_examples() {
        let a = clausius_check(-1.0, 0.0, 1.0, &C);
        assert!(a.satisfied && a.slack == 1.0);
        let b = clausius_check(0.1, -0.1, 1.0, &C);
        assert!(!b.satisfied && (b.slack + 0.2).abs() < 1e-15);
    }

    #[test]
    fn landauer_examples() {
        assert_eq!(landauer_bound(0.0, 1.0, &C).unwrap(), 0.0);
        assert!((landauer_bound(2f64.ln(), 1.0, &C).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        let s = entropy(SymplecticParam::new(1.0).unwrap());
        assert!((landauer_bound(s, 2.0, &C).unwrap() - 2.0 * 0.95477).abs() < 1e-4);
        assert!(landauer_bound(-0.1, 1.0, &C).is_err());
        assert!(landauer_bound(0.1, 0.0, &C).is_err());
    }

    #[test]
    fn null_paths_are_exactly_zero() {
        let (o, b) = strong();
        let p = ProcessPath::new(Parameter::Mass, 1.0, 1.0, 9).unwrap();
        let r = process(&p, &o, &b, &C).unwrap();
        assert_eq!((r.delta_entropy, r.heat), (0.0, 0.0));
        let r = coupling_process(&o, &b.with_damping(0.0).unwrap(), &C).unwrap();
        assert_eq!((r.delta_entropy, r.heat), (0.0, 0.0));
    }

    #[test]
    fn decoupled_mass_change_is_null() {
        let o = OscillatorParams::unit();
        let b = BathSpec::new(0.5, 0.0, 50.0).unwrap();
        let r = mass_process(&o, &b, &C, 2.0, 17).unwrap();
        assert!(r.delta_entropy.abs() < 1e-12, "{r:?}");
        assert!(r.heat.abs() < 1e-9, "{r:?}");
        assert!(r.clausius_satisfied);
    }

    #[test]
    fn path_must_start_at_state() {
        let (o, b) = strong();
        let p = ProcessPath::new(Parameter::Mass, 2.0, 3.0, 9).unwrap();
        assert!(matches!(heat(&p, &o, &b, &C), Err(Error::InvalidState(_))));
    }

    #[test]
    fn mass_step_alone_looks_like_a_violation() {
        let (o, b) = strong();
        let r = mass_process(&o, &b, &C, 2.0, 17).unwrap();
        assert!(r.delta_entropy < 0.0 && r.heat > 0.0, "{r:?}");
        assert!(r.is_apparent_violation());
    }

    #[test]
    fn two_step_process_restores_clausius() {
        let (o, b) = strong();
        let r = composed_process(&o, &b, &C, 2.0, 17).unwrap();
        assert!(r.coupling.heat < 0.0);
        assert!(r.coupling.heat.abs() >= r.mass.heat.abs());
        assert!(r.total.delta_entropy >= 0.0, "{r:?}");
        assert!(r.total.heat <= 0.0, "{r:?}");
        assert!(r.total.clausius_satisfied);
    }

    #[test]
    fn weak_coupling_step_is_nearly_null() {
        // Both quantities vanish linearly in the damping.
        let o = OscillatorParams::unit();
        let at = |g: f64| coupling_process(&o, &BathSpec::new(1.0, g, 50.0).unwrap(), &C).unwrap();
        let (a, b) = (at(1e-6), at(1e-7));
        assert!(a.heat.abs() < 1e-4 && a.delta_entropy.abs() < 1e-5, "{a:?}");
        assert!((a.heat / b.heat - 10.0).abs() < 0.01);
        assert!((a.delta_entropy / b.delta_entropy - 10.0).abs() < 0.01);
    }

    #[test]
    fn reversed_path_flips_signs() {
        let (o, b) = strong();
        let fwd = mass_process(&o, &b, &C, 2.0, 17).unwrap();
        let (o2, b2) = state_along(&o, &b, Parameter::Mass, 2.0).unwrap();
        let back = ProcessPath::new(Parameter::Mass, 2.0, 1.0, 17).unwrap();
        let rev = process(&back, &o2, &b2, &C).unwrap();
        assert!((fwd.delta_entropy + rev.delta_entropy).abs() < 1e-12);
        assert!((fwd.heat + rev.heat).abs() < fwd.heat_error + rev.heat_error);
    }
}
