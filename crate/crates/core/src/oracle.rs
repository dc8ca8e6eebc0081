//! Brute-force oracle: an explicit finite bath of harmonic modes, coupled
//! bilinearly to the oscillator with the matching counter-term, whose global
//! Gibbs state is obtained from an exact normal-mode decomposition.

use std::f64::consts::PI;

use faer::{Mat, Side};
use rayon::prelude::*;

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::gaussian::{coth, Moments, OscillatorParams};
use crate::units::Constants;

/// Relative eigen-residual `|K x - lambda x| / |K|` accepted from the solver.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Successive relative change below which a convergence study is flagged converged.
pub const CONVERGENCE_TOL: f64 = 5e-3;

/// How the bath modes are placed on `(0, omega_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyGrid {
    /// `omega_k = k omega_max / N`.
    Linear,
    /// Midpoints of a uniform grid in `x` mapped through
    /// `omega = omega_max sinh(stretch x) / sinh(stretch)`: fine spacing at low
    /// frequency where the reduced position variance is decided.
    Graded { stretch: f64 },
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid::Graded { stretch: 7.0 }
    }
}

/// Default upper frequency, `20 max(wD, omega)`.
pub fn default_omega_max(o: &OscillatorParams, b: &BathSpec) -> f64 {
    20.0 * b.cutoff.max(o.frequency)
}

/// `N` explicit bath modes (unit masses) with couplings `c_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBath {
    pub mode_frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
}

impl DiscreteBath {
    pub fn new(mode_frequencies: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if mode_frequencies.is_empty() {
            return Err(Error::param("mode_count", 0.0, "need at least one bath mode"));
        }
        if mode_frequencies.len() != couplings.len() {
            return Err(Error::DimensionMismatch {
                expected: mode_frequencies.len(),
                found: couplings.len(),
            });
        }
        if mode_frequencies.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidState("bath mode frequencies must be positive".into()));
        }
        if mode_frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidState("bath mode frequencies must be ascending".into()));
        }
        Ok(Self {
            mode_frequencies,
            couplings,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_frequencies.len()
    }

    /// `sum_k c_k^2 / (2 m_k omega_k^2)`, the coefficient of `q^2` that keeps
    /// the static oscillator frequency at `omega`.
    pub fn counter_term(&self) -> f64 {
        self.mode_frequencies
            .iter()
            .zip(&self.couplings)
            .map(|(w, c)| c * c / (2.0 * w * w))
            .sum()
    }
}

/// Drude-Ohmic spectral density `J(u) = M gamma u wD^2/(u^2 + wD^2)`.
pub fn spectral_density(u: f64, o: &OscillatorParams, b: &BathSpec) -> f64 {
    let wd2 = b.cutoff * b.cutoff;
    b.friction(o) * u * wd2 / (u * u + wd2)
}

/// Discretizes `J` with `c_k^2 = (2/pi) m_k omega_k J(omega_k) dw_k`.
pub fn sample_bath(
    b: &BathSpec,
    o: &OscillatorParams,
    mode_count: usize,
    omega_max: f64,
    grid: FrequencyGrid,
) -> Result<DiscreteBath> {
    if mode_count == 0 {
        return Err(Error::param("mode_count", 0.0, "need at least one bath mode"));
    }
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::param("omega_max", omega_max, "must be positive and finite"));
    }
    let n = mode_count as f64;
    let (freqs, widths): (Vec<f64>, Vec<f64>) = match grid {
        FrequencyGrid::Linear => {
            let dw = omega_max / n;
            (1..=mode_count).map(|k| (k as f64 * dw, dw)).unzip()
        }
        FrequencyGrid::Graded { stretch } => {
            if !(stretch > 0.0 && stretch.is_finite()) {
                return Err(Error::param("stretch", stretch, "must be positive"));
            }
            let norm = omega_max / stretch.sinh();
            (1..=mode_count)
                .map(|k| {
                    let x = (k as f64 - 0.5) / n;
                    (norm * (stretch * x).sinh(), norm * stretch * (stretch * x).cosh() / n)
                })
                .unzip()
        }
    };
    let couplings = freqs
        .iter()
        .zip(&widths)
        .map(|(&w, &dw)| (2.0 / PI * w * spectral_density(w, o, b) * dw).sqrt())
        .collect();
    DiscreteBath::new(freqs, couplings)
}

/// Potential energy `x^T K x / 2` over `(q, x_1, ..., x_N)` and the masses.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub stiffness: Mat<f64>,
    pub masses: Vec<f64>,
}

impl QuadraticForm {
    pub fn new(db: &DiscreteBath, o: &OscillatorParams) -> Self {
        let n = db.mode_count();
        let k00 = o.stiffness() + 2.0 * db.counter_term();
        let stiffness = Mat::from_fn(n + 1, n + 1, |i, j| match (i, j) {
            (0, 0) => k00,
            (0, k) | (k, 0) => -db.couplings[k - 1],
            (i, j) if i == j => db.mode_frequencies[i - 1].powi(2),
            _ => 0.0,
        });
        let mut masses = vec![1.0; n + 1];
        masses[0] = o.mass;
        Self { stiffness, masses }
    }

    pub fn dim(&self) -> usize {
        self.masses.len()
    }

    /// Largest asymmetry `|K_ij - K_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.stiffness[(i, j)] - self.stiffness[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Normal modes of a mass-weighted quadratic form.
struct NormalModes {
    /// `Omega_j^2`, ascending.
    eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors of `M^-1/2 K M^-1/2`, one per column.
    vectors: Mat<f64>,
}

fn normal_modes(form: &QuadraticForm) -> Result<NormalModes> {
    let n = form.dim();
    let inv_sqrt: Vec<f64> = form.masses.iter().map(|m| 1.0 / m.sqrt()).collect();
    let weighted = Mat::from_fn(n, n, |i, j| form.stiffness[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let eig = weighted
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = eig.S().column_vector();
    let mut modes = NormalModes {
        eigenvalues: (0..n).map(|j| s[j]).collect(),
        vectors: eig.U().to_owned(),
    };

    let (worst, norm) = arrowhead_residual(&weighted, &modes);
    if worst > EIGEN_RESIDUAL_TOL * norm {
        // faer's solver occasionally loses an eigenvector when the diagonal
        // spans many decades; the implicit QR in nalgebra does not.
        modes = qr_modes(&weighted);
        let (worst, norm) = arrowhead_residual(&weighted, &modes);
        if worst > EIGEN_RESIDUAL_TOL * norm {
            return Err(Error::Eigen(format!(
                "eigen residual {worst:e} exceeds {EIGEN_RESIDUAL_TOL:e} x |K|_inf = {norm:e}"
            )));
        }
    }
    if let Some(&bad) = modes.eigenvalues.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::UnstableMode { eigenvalue: bad });
    }
    Ok(modes)
}

fn qr_modes(weighted: &Mat<f64>) -> NormalModes {
    let n = weighted.nrows();
    let eig = nalgebra::DMatrix::from_fn(n, n, |i, j| weighted[(i, j)]).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    NormalModes {
        eigenvalues: order.iter().map(|&j| eig.eigenvalues[j]).collect(),
        vectors: Mat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]),
    }
}

/// Worst `|K x - lambda x|` over all modes, and `|K|_inf`. The form is an
/// arrowhead (diagonal plus first row/column), so each residual costs O(n).
fn arrowhead_residual(weighted: &Mat<f64>, modes: &NormalModes) -> (f64, f64) {
    let n = weighted.nrows();
    let row0: f64 = (0..n).map(|i| weighted[(0, i)].abs()).sum();
    let norm = (1..n)
        .map(|i| weighted[(i, i)].abs() + weighted[(i, 0)].abs())
        .fold(row0, f64::max);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let x = modes.vectors.col(j);
        let lambda = modes.eigenvalues[j];
        let mut r0 = weighted[(0, 0)] * x[0] - lambda * x[0];
        let mut r_sq = 0.0;
        for i in 1..n {
            r0 += weighted[(0, i)] * x[i];
            let ri = weighted[(i, 0)] * x[0] + weighted[(i, i)] * x[i] - lambda * x[i];
            r_sq += ri * ri;
        }
        worst = worst.max((r_sq + r0 * r0).sqrt());
    }
    (worst, norm)
}

/// Per-mode thermal variances `(<Y^2>, <Pi^2>)` in mass-weighted normal coordinates.
fn mode_variances(lambda: f64, temperature: f64, c: &Constants) -> (f64, f64) {
    let omega = lambda.sqrt();
    let ct = coth(c.hbar * omega / (2.0 * c.thermal_energy(temperature)));
    (c.hbar / (2.0 * omega) * ct, c.hbar * omega / 2.0 * ct)
}

/// Everything the oracle extracts from one global Gibbs state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleState {
    pub moments: Moments,
    /// `<H_b>` in the coupled Gibbs state minus its value for the free bath.
    pub bath_energy_shift: f64,
    /// Smallest normal-mode frequency squared.
    pub min_eigenvalue: f64,
}

pub fn equilibrium(
    db: &DiscreteBath,
    o: &OscillatorParams,
    temperature: f64,
    c: &Constants,
) -> Result<OracleState> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::param("temperature", temperature, "must be positive and finite"));
    }
    let form = QuadraticForm::new(db, o);
    let modes = normal_modes(&form)?;
    let n = form.dim();
    let variances: Vec<(f64, f64)> = modes
        .eigenvalues
        .iter()
        .map(|&l| mode_variances(l, temperature, c))
        .collect();

    let (mut qq, mut pp, mut qp) = (0.0, 0.0, 0.0);
    for (j, &(yy, pipi)) in variances.iter().enumerate() {
        let w = modes.vectors[(0, j)].powi(2);
        qq += w * yy;
        pp += w * pipi;
        // Each normal mode is in its own Gibbs state, so <Y Pi + Pi Y>/2 = 0.
        qp += w * 0.0;
    }
    let moments = Moments::new(qq / o.mass, pp * o.mass, qp)?;

    let mut bath_energy = 0.0;
    for (j, &(yy, pipi)) in variances.iter().enumerate() {
        let col = modes.vectors.col(j);
        let mut e = 0.0;
        for k in 1..n {
            let wk2 = db.mode_frequencies[k - 1].powi(2);
            e += col[k] * col[k] * (pipi + wk2 * yy);
        }
        bath_energy += 0.5 * e;
    }
    let free: f64 = db
        .mode_frequencies
        .iter()
        .map(|&w| 0.5 * c.hbar * w * coth(c.hbar * w / (2.0 * c.thermal_energy(temperature))))
        .sum();

    Ok(OracleState {
        moments,
        bath_energy_shift: bath_energy - free,
        min_eigenvalue: modes.eigenvalues[0],
    })
}

/// Reduced oscillator moments in the global Gibbs state of oscillator and bath.
pub fn reduced_moments_exact(
    db: &DiscreteBath,
    o: &OscillatorParams,
    temperature: f64,
    c: &Constants,
) -> Result<Moments> {
    equilibrium(db, o, temperature, c).map(|s| s.moments)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub mode_count: usize,
    pub f1: f64,
    pub f2: f64,
    pub cross: f64,
    /// Relative change of `f1` (`f2`) from the previous row.
    pub delta_f1: Option<f64>,
    pub delta_f2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Last successive change below [`CONVERGENCE_TOL`] in both moments.
    pub converged: bool,
}

/// Reduced moments for an ascending sequence of bath sizes.
pub fn convergence_report(
    o: &OscillatorParams,
    b: &BathSpec,
    mode_counts: &[usize],
    omega_max: f64,
    grid: FrequencyGrid,
    c: &Constants,
) -> Result<ConvergenceReport> {
    if mode_counts.is_empty() || mode_counts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!(
            "mode counts must be non-empty and strictly ascending, got {mode_counts:?}"
        )));
    }
    let moments = mode_counts
        .par_iter()
        .map(|&n| {
            let db = sample_bath(b, o, n, omega_max, grid)?;
            reduced_moments_exact(&db, o, b.temperature, c)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(moments.len());
    for (&n, m) in mode_counts.iter().zip(&moments) {
        let prev = rows.last();
        rows.push(ConvergenceRow {
            mode_count: n,
            f1: m.f1,
            f2: m.f2,
            cross: m.cross,
            delta_f1: prev.map(|p| ((m.f1 - p.f1) / p.f1).abs()),
            delta_f2: prev.map(|p| ((m.f2 - p.f2) / p.f2).abs()),
        });
    }
    let converged = rows
        .last()
        .and_then(|r| Some(r.delta_f1? < CONVERGENCE_TOL && r.delta_f2? < CONVERGENCE_TOL))
        .unwrap_or(false);
    Ok(ConvergenceReport { rows, converged })
}
