//! Single-mode Gaussian states: moments, the symplectic parameter, entropy
//! and energy, plus the decoupled thermal reference state.

use crate::error::{Error, Result};
use crate::units::Constants;

/// Absolute slack allowed on the uncertainty bound `f1 f2 - cross^2 >= hbar^2/4`,
/// in units of `hbar^2`.
pub const UNCERTAINTY_TOL: f64 = 1e-12;

/// Below this `v - 1/2` the `(v - 1/2) ln(v - 1/2)` term is taken as its limit 0.
const PURE_STATE_EPS: f64 = 1e-30;

/// Mass and bare frequency of the central oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub mass: f64,
    pub frequency: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, frequency: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::param("mass", mass, "must be positive and finite"));
        }
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::param("frequency", frequency, "must be positive and finite"));
        }
        Ok(Self { mass, frequency })
    }

    /// `M = omega = 1`.
    pub fn unit() -> Self {
        Self {
            mass: 1.0,
            frequency: 1.0,
        }
    }

    pub fn with_mass(self, mass: f64) -> Result<Self> {
        Self::new(mass, self.frequency)
    }

    /// Spring constant `M omega^2`.
    pub fn stiffness(&self) -> f64 {
        self.mass * self.frequency * self.frequency
    }
}

/// Second moments of a zero-mean single-mode Gaussian state.
///
/// `cross` is the symmetrized correlation `<qp + pq>/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub f1: f64,
    pub f2: f64,
    pub cross: f64,
}

impl Moments {
    pub fn new(f1: f64, f2: f64, cross: f64) -> Result<Self> {
        if !(f1 > 0.0 && f1.is_finite()) {
            return Err(Error::param("f1", f1, "position variance must be positive and finite"));
        }
        if !(f2 > 0.0 && f2.is_finite()) {
            return Err(Error::param("f2", f2, "momentum variance must be positive and finite"));
        }
        if !cross.is_finite() {
            return Err(Error::param("cross", cross, "must be finite"));
        }
        Ok(Self { f1, f2, cross })
    }

    /// Determinant of the covariance matrix, `f1 f2 - cross^2`.
    pub fn determinant(&self) -> f64 {
        self.f1 * self.f2 - self.cross * self.cross
    }

    /// `f1 f2 - cross^2 - hbar^2/4`; non-negative for physical states.
    pub fn uncertainty_slack(&self, c: &Constants) -> f64 {
        self.determinant() - 0.25 * c.hbar * c.hbar
    }

    pub fn satisfies_uncertainty(&self, c: &Constants) -> bool {
        self.uncertainty_slack(c) >= -UNCERTAINTY_TOL * c.hbar * c.hbar
    }

    /// Relative deviation from `other`, the larger of the two variances.
    pub fn max_rel_diff(&self, other: &Moments) -> f64 {
        let d1 = ((self.f1 - other.f1) / other.f1).abs();
        let d2 = ((self.f2 - other.f2) / other.f2).abs();
        d1.max(d2)
    }
}

/// Symplectic eigenvalue in units of `hbar`; `1/2` is a pure state and
/// `v - 1/2` the thermal occupation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SymplecticParam(f64);

impl SymplecticParam {
    pub fn new(v: f64) -> Result<Self> {
        if !v.is_finite() || v < 0.5 - UNCERTAINTY_TOL {
            return Err(Error::param("v", v, "symplectic parameter must be >= 1/2"));
        }
        Ok(Self(v.max(0.5)))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Thermal occupation `v - 1/2`.
    pub fn occupation(self) -> f64 {
        self.0 - 0.5
    }
}

/// `v = sqrt(f1 f2 - cross^2) / hbar`.
pub fn symplectic_param(m: &Moments, c: &Constants) -> Result<SymplecticParam> {
    let det = m.determinant();
    let bound = 0.25 * c.hbar * c.hbar;
    if det < bound - UNCERTAINTY_TOL * c.hbar * c.hbar {
        return Err(Error::Uncertainty {
            determinant: det,
            bound,
        });
    }
    SymplecticParam::new(det.max(bound).sqrt() / c.hbar)
}

/// Von Neumann entropy in nats of a Gaussian state with symplectic parameter `v`:
/// `(v + 1/2) ln(v + 1/2) - (v - 1/2) ln(v - 1/2)`.
pub fn entropy(v: SymplecticParam) -> f64 {
    let v = v.value();
    let plus = v + 0.5;
    let minus = v - 0.5;
    let tail = if minus < PURE_STATE_EPS {
        0.0
    } else {
        minus * minus.ln()
    };
    plus * plus.ln() - tail
}

/// `dS/dv = ln((v + 1/2)/(v - 1/2))`; infinite at the pure state.
pub fn entropy_slope(v: SymplecticParam) -> f64 {
    let v = v.value();
    if v - 0.5 < PURE_STATE_EPS {
        f64::INFINITY
    } else {
        ((v + 0.5) / (v - 0.5)).ln()
    }
}

/// Entropy straight from moments.
pub fn entropy_of(m: &Moments, c: &Constants) -> Result<f64> {
    Ok(entropy(symplectic_param(m, c)?))
}

/// `<H_o> = f2/(2M) + M omega^2 f1 / 2`.
pub fn mean_energy(m: &Moments, o: &OscillatorParams) -> f64 {
    m.f2 / (2.0 * o.mass) + 0.5 * o.stiffness() * m.f1
}

/// `coth(x)`, accurate for small and large arguments.
pub(crate) fn coth(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

/// Gibbs moments of the uncoupled oscillator:
/// `f1 = hbar/(2 M omega) coth(hbar omega / 2 k_B T)`, `f2 = (M omega)^2 f1`.
pub fn thermal_moments_decoupled(
    o: &OscillatorParams,
    temperature: f64,
    c: &Constants,
) -> Result<Moments> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::param("temperature", temperature, "must be positive and finite"));
    }
    let x = c.hbar * o.frequency / (2.0 * c.kb * temperature);
    let ct = coth(x);
    let f1 = c.hbar / (2.0 * o.mass * o.frequency) * ct;
    let f2 = 0.5 * o.mass * c.hbar * o.frequency * ct;
    Moments::new(f1, f2, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use num_complex::Complex64;
    use proptest::prelude::*;

    const C: Constants = Constants::NATURAL;

    #[test]
    fn ground_state_saturates_uncertainty() {
        let o = OscillatorParams::new(2.0, 3.0).unwrap();
        let m = Moments::new(0.5 / (o.mass * o.frequency), 0.5 * o.mass * o.frequency, 0.0).unwrap();
        let v = symplectic_param(&m, &C).unwrap();
        assert!((v.value() - 0.5).abs() < 1e-15);
        assert_eq!(entropy(v), 0.0);
        assert!((mean_energy(&m, &o) - 0.5 * o.frequency).abs() < 1e-14);
    }

    #[test]
    fn coth_three_gives_three_halves() {
        let p = 0.5 * 3.0;
        let m = Moments::new(p / 4.0, p * 4.0, 0.0).unwrap();
        assert!((symplectic_param(&m, &C).unwrap().value() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_sub_heisenberg_moments() {
        let m = Moments::new(0.4, 0.4, 0.0).unwrap();
        assert!(matches!(symplectic_param(&m, &C), Err(Error::Uncertainty { .. })));
        assert!(SymplecticParam::new(0.49).is_err());
        assert!(Moments::new(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn entropy_at_v1_matches_occupation_form() {
        // (n+1) ln(n+1) - n ln n with n = 1/2
        let n: f64 = 0.5;
        let oracle = (n + 1.0) * (n + 1.0).ln() - n * n.ln();
        let s = entropy(SymplecticParam::new(1.0).unwrap());
        assert!((s - oracle).abs() < 1e-15);
        assert!((s - 0.95477).abs() < 1e-5);
    }

    #[test]
    fn entropy_large_v_asymptote() {
        let v = 1e3;
        let s = entropy(SymplecticParam::new(v).unwrap());
        let asym = v.ln() + 1.0;
        // S - (ln v + 1) = -1/(24 v^2) + O(v^-4)
        assert!(((s - asym) / asym).abs() < 1e-6);
        assert!((s - asym + 1.0 / (24.0 * v * v)).abs() < 1e-11);
    }

    #[test]
    fn entropy_is_continuous_at_pure_state() {
        let s = entropy(SymplecticParam::new(0.5 + 1e-31).unwrap());
        assert_eq!(s, 0.0);
        let s = entropy(SymplecticParam::new(0.5 + 1e-12).unwrap());
        assert!(s > 0.0 && s < 1e-10);
    }

    #[test]
    fn entropy_monotone_on_grid() {
        let mut prev = 0.0;
        for i in 0..1000 {
            let v = 0.5 + i as f64 * 0.01;
            let s = entropy(SymplecticParam::new(v).unwrap());
            assert!(s - prev >= 0.0, "decrease at v = {v}");
            prev = s;
        }
    }

    #[test]
    fn equipartition_in_classical_limit() {
        let o = OscillatorParams::new(1.3, 0.7).unwrap();
        let kt = 2.5;
        let m = Moments::new(kt / o.stiffness(), o.mass * kt, 0.0).unwrap();
        assert!((mean_energy(&m, &o) - kt).abs() < 1e-14);
    }

    #[test]
    fn thermal_energy_at_kt_equal_hbar_omega() {
        let o = OscillatorParams::unit();
        let m = thermal_moments_decoupled(&o, 1.0, &C).unwrap();
        let expected = 0.5 * coth(0.5);
        assert!((mean_energy(&m, &o) - expected).abs() < 1e-14);
    }

    #[test]
    fn thermal_ground_state_limit() {
        let o = OscillatorParams::new(1.0, 1.0).unwrap();
        let m = thermal_moments_decoupled(&o, 1e-8, &C).unwrap();
        assert!((symplectic_param(&m, &C).unwrap().value() - 0.5).abs() < 1e-6);
        assert!(thermal_moments_decoupled(&o, 0.0, &C).is_err());
    }

    #[test]
    fn thermal_product_and_ratio_identities() {
        let o = OscillatorParams::new(1.7, 0.9).unwrap();
        for tr in [0.1, 1.0, 10.0] {
            let t = C.temperature_from_reduced(tr, o.frequency);
            let m = thermal_moments_decoupled(&o, t, &C).unwrap();
            let ct = coth(1.0 / (2.0 * tr));
            let prod = (0.5 * ct).powi(2);
            assert!((m.f1 * m.f2 / prod - 1.0).abs() < 1e-14);
            assert!((m.f2 / m.f1 / (o.mass * o.frequency).powi(2) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn high_temperature_energy_near_kt() {
        // coth(x) = 1/x + x/3 + ..., so E/kT = 1 + x^2/3 with x = 1/20
        let o = OscillatorParams::unit();
        let m = thermal_moments_decoupled(&o, 10.0, &C).unwrap();
        let e = mean_energy(&m, &o);
        assert!((e / 10.0 - 1.0).abs() < 5e-3);
        assert!((e / 10.0 - (1.0 + 0.05f64.powi(2) / 3.0)).abs() < 1e-6);
    }

    /// Symplectic eigenvalue from the spectrum of `i Omega sigma`.
    fn symplectic_oracle(m: &Moments) -> f64 {
        let sigma = Matrix2::new(m.f1, m.cross, m.cross, m.f2).map(|x| Complex64::new(x, 0.0));
        let omega = Matrix2::new(0.0, 1.0, -1.0, 0.0).map(|x| Complex64::new(0.0, x));
        let eig = (omega * sigma).eigenvalues().expect("2x2 eigenvalues");
        eig[0].re.abs()
    }

    proptest! {
        #[test]
        fn symplectic_param_matches_eigen_oracle(
            f1 in 0.05f64..20.0, r in 0.25f64..50.0, c in -0.9f64..0.9
        ) {
            // f2 chosen so the state is physical; cross as a fraction of the headroom
            let f2 = r / f1;
            let cross = c * (f1 * f2 - 0.25).max(0.0).sqrt();
            let m = Moments::new(f1, f2, cross).unwrap();
            let v = symplectic_param(&m, &C).unwrap().value();
            prop_assert!((v - symplectic_oracle(&m)).abs() < 1e-9 * v.max(1.0));
        }

        #[test]
        fn thermal_energy_identity(tr in 0.01f64..100.0, mass in 0.1f64..10.0, freq in 0.1f64..10.0) {
            let o = OscillatorParams::new(mass, freq).unwrap();
            let t = C.temperature_from_reduced(tr, freq);
            let m = thermal_moments_decoupled(&o, t, &C).unwrap();
            let expected = 0.5 * freq * coth(freq / (2.0 * t));
            prop_assert!((mean_energy(&m, &o) / expected - 1.0).abs() < 1e-12);
        }

        #[test]
        fn thermal_entropy_increases_with_temperature(t in 0.01f64..50.0, dt in 1e-3f64..5.0) {
            let o = OscillatorParams::unit();
            let s0 = entropy_of(&thermal_moments_decoupled(&o, t, &C).unwrap(), &C).unwrap();
            let s1 = entropy_of(&thermal_moments_decoupled(&o, t + dt, &C).unwrap(), &C).unwrap();
            prop_assert!(s1 >= s0);
        }
    }
}
