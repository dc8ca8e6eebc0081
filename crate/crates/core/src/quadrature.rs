//! Numerical integration: globally adaptive Gauss-Kronrod (10/21 point) on
//! finite intervals with user breakpoints, a mapped rule for semi-infinite
//! tails, and composite Simpson rules on uniform grids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Nodes and weights as tabulated in QUADPACK, digits kept verbatim.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_980_287,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Value of an integral with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive integrator. The interval with the largest error estimate
/// is bisected until the total estimate meets `max(abs_tol, rel_tol |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_segments: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_segments: 20_000,
        }
    }
}

impl Integrator {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrate over `[points[0], points[last]]`; interior entries are
    /// initial breakpoints and must be ascending.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<QuadResult> {
        if points.len() < 2 || points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::numerical(
                "quadrature",
                format!("breakpoints must be strictly ascending, got {points:?}"),
            ));
        }
        let mut heap = BinaryHeap::new();
        let mut evaluations = 0;
        // Segments too narrow to bisect further are set aside but still counted.
        let mut frozen = (0.0, 0.0);
        for w in points.windows(2) {
            let (value, error) = gk21(&f, w[0], w[1]);
            evaluations += 21;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
        let totals = |heap: &BinaryHeap<Segment>, frozen: (f64, f64)| {
            heap.iter()
                .fold(frozen, |(v, e), s| (v + s.value, e + s.error))
        };
        let (mut total, mut total_err) = totals(&heap, frozen);
        while let Some(seg) = heap.peek().copied() {
            if !total.is_finite() || !total_err.is_finite() {
                return Err(Error::numerical(
                    "quadrature",
                    format!("non-finite integrand value (sum {total}, error {total_err})"),
                ));
            }
            if total_err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                break;
            }
            if heap.len() >= self.max_segments {
                return Err(Error::numerical(
                    "quadrature",
                    format!(
                        "no convergence after {} segments: value {total:e}, error estimate {total_err:e}",
                        heap.len()
                    ),
                ));
            }
            heap.pop();
            let mid = 0.5 * (seg.a + seg.b);
            if (seg.b - seg.a) <= 64.0 * f64::EPSILON * seg.a.abs().max(seg.b.abs()) {
                frozen.0 += seg.value;
                frozen.1 += seg.error;
                continue;
            }
            let (v1, e1) = gk21(&f, seg.a, mid);
            let (v2, e2) = gk21(&f, mid, seg.b);
            evaluations += 42;
            total += v1 + v2 - seg.value;
            total_err += e1 + e2 - seg.error;
            heap.push(Segment {
                a: seg.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: mid,
                b: seg.b,
                value: v2,
                error: e2,
            });
        }
        // Re-sum to shed the drift of the running totals.
        let (value, error) = totals(&heap, frozen);
        if error > 10.0 * self.abs_tol.max(self.rel_tol * value.abs()) {
            return Err(Error::numerical(
                "quadrature",
                format!("roundoff limit reached: value {value:e}, error estimate {error:e}"),
            ));
        }
        Ok(QuadResult {
            value,
            error,
            evaluations,
        })
    }

    /// `int_a^inf f(x) dx` for `a > 0` through `x = a/t`; suited to
    /// integrands with algebraic decay.
    pub fn integrate_tail<F: Fn(f64) -> f64>(&self, f: F, a: f64) -> Result<QuadResult> {
        if !(a > 0.0) {
            return Err(Error::numerical("quadrature", format!("tail start must be positive, got {a}")));
        }
        self.integrate(
            |t| {
                let x = a / t;
                f(x) * a / (t * t)
            },
            &[0.0, 1.0],
        )
    }
}

/// Composite Simpson on `values` sampled at uniform spacing `h`; the number
/// of intervals must be even.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Composite rule for any number of intervals >= 1: Simpson panels, with a
/// closing 3/8 panel when the count is odd (trapezoid for a single interval).
pub fn simpson_any(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ if n.is_multiple_of(2) => simpson(values, h),
        3 => 3.0 * h / 8.0 * (values[0] + 3.0 * values[1] + 3.0 * values[2] + values[3]),
        _ => {
            let head = simpson(&values[..=n - 3], h);
            let t = &values[n - 3..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

/// Running integral from the first node to every node.
pub fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    (0..values.len()).map(|i| simpson_any(&values[..=i], h)).collect()
}

/// Simpson on the full grid with a Richardson error estimate from the
/// half-density grid (every other node), doubled for safety.
pub fn simpson_with_estimate(values: &[f64], h: f64) -> QuadResult {
    let full = simpson(values, h);
    let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
    let half = simpson_any(&coarse, 2.0 * h);
    QuadResult {
        value: full,
        error: 2.0 * (full - half).abs() / 15.0,
        evaluations: values.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        // Gauss 10 is exact to degree 19, Kronrod 21 to degree 31.
        for deg in [0, 5, 19, 31] {
            let (k, _) = gk21(&|x: f64| x.powi(deg), 0.0, 1.0);
            assert!((k - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
        let (_, e) = gk21(&|x: f64| x.powi(19), 0.0, 1.0);
        assert!(e < 1e-14);
    }

    #[test]
    fn adaptive_handles_narrow_lorentzian() {
        let w = 1e-6;
        let f = |x: f64| w / std::f64::consts::PI / (x * x + w * w);
        let pts = [-1.0, -100.0 * w, -w, 0.0, w, 100.0 * w, 1.0];
        let r = Integrator::with_rel_tol(1e-12).integrate(f, &pts).unwrap();
        let exact = (1.0 / w).atan() / std::f64::consts::PI * 2.0;
        assert!((r.value - exact).abs() <= r.error.max(1e-15), "{} vs {exact}, {r:?}", r.value);
    }

    #[test]
    fn adaptive_handles_log_endpoint_singularity() {
        let r = Integrator::with_rel_tol(1e-10).integrate(|x: f64| x.ln(), &[0.0, 1.0]).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn tail_of_inverse_square() {
        let r = Integrator::with_rel_tol(1e-12).integrate_tail(|x| 1.0 / (x * x + 1.0), 1.0).unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let integ = Integrator {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_segments: 4,
        };
        let r = integ.integrate(|x: f64| (1.0 / x).sin(), &[1e-6, 1.0]);
        assert!(matches!(r, Err(Error::Numerical { .. })));
    }

    #[test]
    fn simpson_rules() {
        let h = 0.1;
        let xs: Vec<f64> = (0..=8).map(|i| i as f64 * h).collect();
        let cubic: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        assert!((simpson(&cubic, h) - 0.8f64.powi(4) / 4.0).abs() < 1e-14);
        let c = cumulative(&cubic, h);
        // Node 1 is a lone trapezoid, not exact for a cubic.
        for (i, x) in xs.iter().enumerate().filter(|(i, _)| *i != 1) {
            assert!((c[i] - x.powi(4) / 4.0).abs() < 1e-14, "node {i}");
        }
        let exp: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let r = simpson_with_estimate(&exp, h);
        let exact = 0.8f64.exp() - 1.0;
        assert!((r.value - exact).abs() <= r.error);
    }
}
