//! Quantum information bookkeeping for an ensemble sent from one party to
//! another: von Neumann entropy, Holevo quantity, measurement mutual
//! information, a search-based lower bound on accessible information, and
//! the erasure heats of sender, receiver and their difference.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::units::Constants;

pub mod sampling;

/// Hermiticity, trace and eigenvalue tolerance of a density matrix.
pub const STATE_TOL: f64 = 1e-12;
/// `sum_m E_m = I` tolerance of a POVM.
pub const POVM_TOL: f64 = 1e-10;
/// Smallest accepted eigenvalue of a POVM element.
pub const POVM_PSD_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Rounds for messages so `0.5 + 0.4` reads as `0.9`.
fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidState("density matrix has non-finite entries".into()));
        }
        let asym = max_abs(&(&matrix - matrix.adjoint()));
        if asym > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian: max |rho - rho^dag| = {asym:e}")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {} differs from 1", tidy(tr.re))));
        }
        let lowest = hermitian_eigenvalues(&matrix)[0];
        if lowest < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lowest:e}")));
        }
        Ok(Self { matrix })
    }

    /// `|psi><psi|` for a normalized `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state vector has norm^2 {}", tidy(norm))));
        }
        let n = psi.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(CMatrix::identity(dim, dim) / Complex64::from(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

/// `-tr(rho ln rho)` in nats.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for l in rho.eigenvalues() {
        if l < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {l:e}")));
        }
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    Ok(s.max(0.0))
}

/// States `rho_i` sent with probabilities `p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    probabilities: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(probabilities: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidState("ensemble is empty".into()));
        }
        if probabilities.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: probabilities.len(),
            });
        }
        if let Some(p) = probabilities.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidState(format!("probability {p} is negative")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("probabilities sum {}", tidy(total))));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(Self {
            probabilities,
            states,
        })
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }
}

/// `sum_i p_i rho_i`.
pub fn average_state(e: &Ensemble) -> Result<DensityMatrix> {
    let n = e.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (p, s) in e.probabilities.iter().zip(&e.states) {
        acc += s.matrix() * Complex64::from(*p);
    }
    DensityMatrix::new(acc)
}

/// Measurement with outcomes `E_m >= 0`, `sum_m E_m = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidState("POVM has no elements".into()));
        };
        let n = first.nrows();
        let mut sum = CMatrix::zeros(n, n);
        for (k, e) in elements.iter().enumerate() {
            if e.nrows() != n || e.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: e.nrows().max(e.ncols()),
                });
            }
            let asym = max_abs(&(e - e.adjoint()));
            if asym > POVM_TOL {
                return Err(Error::InvalidState(format!("POVM element {k} is not Hermitian ({asym:e})")));
            }
            let lowest = hermitian_eigenvalues(e)[0];
            if lowest < -POVM_PSD_TOL {
                return Err(Error::InvalidState(format!(
                    "POVM element {k} has negative eigenvalue {lowest:e}"
                )));
            }
            sum += e;
        }
        let dev = max_abs(&(sum - CMatrix::identity(n, n)));
        if dev > POVM_TOL {
            return Err(Error::InvalidState(format!("POVM elements sum to identity only within {dev:e}")));
        }
        Ok(Self { elements })
    }

    /// Projective measurement onto an orthonormal basis given as columns.
    pub fn projective(basis: &CMatrix) -> Result<Self> {
        let elements = (0..basis.ncols())
            .map(|k| {
                let v = basis.column(k);
                v * v.adjoint()
            })
            .collect();
        Self::new(elements)
    }

    pub fn computational(dim: usize) -> Result<Self> {
        Self::projective(&CMatrix::identity(dim, dim))
    }

    /// Rank-1 qubit projectors `(I +- n.sigma)/2` along the Bloch direction
    /// `(theta, phi)`.
    pub fn qubit_direction(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let (nx, ny, nz) = (st * cp, st * sp, ct);
        let half = |s: f64| {
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(0.5 * (1.0 + s * nz), 0.0),
                    Complex64::new(0.5 * s * nx, -0.5 * s * ny),
                    Complex64::new(0.5 * s * nx, 0.5 * s * ny),
                    Complex64::new(0.5 * (1.0 - s * nz), 0.0),
                ],
            )
        };
        Self {
            elements: vec![half(1.0), half(-1.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Merges outcomes `a` and `b` into one.
    pub fn coarsened(&self, a: usize, b: usize) -> Result<Self> {
        if a == b || a >= self.elements.len() || b >= self.elements.len() {
            return Err(Error::InvalidState(format!("cannot merge outcomes {a} and {b}")));
        }
        let mut out = Vec::with_capacity(self.elements.len() - 1);
        for (k, e) in self.elements.iter().enumerate() {
            if k == a {
                out.push(e + &self.elements[b]);
            } else if k != b {
                out.push(e.clone());
            }
        }
        Ok(Self { elements: out })
    }
}

/// Joint table `p_im = p_i tr(E_m rho_i)`.
pub fn joint_probabilities(e: &Ensemble, m: &Povm) -> Result<Vec<Vec<f64>>> {
    if e.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: m.dim(),
        });
    }
    Ok(e.probabilities
        .iter()
        .zip(&e.states)
        .map(|(p, s)| {
            m.elements
                .iter()
                .map(|el| p * (el * s.matrix()).trace().re.max(0.0))
                .collect()
        })
        .collect())
}

/// `sum_im p_im ln(p_im / (p_i q_m))` in nats.
pub fn mutual_information(e: &Ensemble, m: &Povm) -> Result<f64> {
    let table = joint_probabilities(e, m)?;
    let outcomes = m.elements.len();
    let q: Vec<f64> = (0..outcomes).map(|k| table.iter().map(|row| row[k]).sum()).collect();
    let mut acc = 0.0;
    for row in &table {
        let pi: f64 = row.iter().sum();
        for (k, &pim) in row.iter().enumerate() {
            if pim > 0.0 {
                acc += pim * (pim / (pi * q[k])).ln();
            }
        }
    }
    Ok(acc.max(0.0))
}

/// `S(sum_i p_i rho_i) - sum_i p_i S(rho_i)`.
pub fn holevo_chi(e: &Ensemble) -> Result<f64> {
    let avg = vn_entropy(&average_state(e)?)?;
    let mut mixed = 0.0;
    for (p, s) in e.probabilities.iter().zip(&e.states) {
        mixed += p * vn_entropy(s)?;
    }
    Ok((avg - mixed).max(0.0))
}

/// Best measurement found and its mutual information.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessibleInfo {
    pub value: f64,
    pub povm: Povm,
    /// Bloch direction of the optimal projector.
    pub theta: f64,
    pub phi: f64,
}

/// Lower bound on the accessible information of a qubit ensemble: the best
/// rank-1 projective measurement over an `effort x 2 effort` grid of Bloch
/// directions, polished by a compass search.
pub fn accessible_info_lower(e: &Ensemble, effort: usize) -> Result<AccessibleInfo> {
    if e.dim() != 2 {
        return Err(Error::InvalidState(format!(
            "measurement search supports qubits only, got dimension {}",
            e.dim()
        )));
    }
    let effort = effort.max(4);
    let info = |theta: f64, phi: f64| -> f64 {
        mutual_information(e, &Povm::qubit_direction(theta, phi)).unwrap_or(0.0)
    };
    use std::f64::consts::PI;
    // n and -n give the same measurement, so the upper hemisphere suffices.
    let dt = 0.5 * PI / effort as f64;
    let dp = PI / effort as f64;
    let mut grid: Vec<(f64, f64, f64)> = (0..=effort)
        .flat_map(|i| (0..2 * effort).map(move |j| (i as f64 * dt, j as f64 * dp)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(t, p)| (info(t, p), t, p))
        .collect();
    grid.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));

    let polish = |(mut best, mut t, mut p): (f64, f64, f64)| {
        let mut step = dt.max(dp);
        while step > 1e-10 {
            let mut moved = false;
            for (a, b) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let val = info(t + a, p + b);
                if val > best {
                    best = val;
                    t += a;
                    p += b;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (best, t, p)
    };
    let (value, theta, phi) = grid
        .iter()
        .take(4)
        .map(|&start| polish(start))
        .fold((f64::NEG_INFINITY, 0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(AccessibleInfo {
        value,
        povm: Povm::qubit_direction(theta, phi),
        theta,
        phi,
    })
}

/// Largest mutual information over caller-supplied measurements, any dimension.
pub fn best_of(e: &Ensemble, povms: &[Povm]) -> Result<(f64, usize)> {
    if povms.is_empty() {
        return Err(Error::InvalidState("no measurements supplied".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, m) in povms.iter().enumerate() {
        let v = mutual_information(e, m)?;
        if v > best.0 {
            best = (v, k);
        }
    }
    Ok(best)
}

/// Minimal erasure heats of the sender's record, the receiver's average
/// state, and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureBudget {
    pub q_martin: f64,
    pub q_amy: f64,
    pub q_shared: f64,
}

pub fn erasure_budget(e: &Ensemble, temperature: f64, c: &Constants) -> Result<ErasureBudget> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::param("temperature", temperature, "must be positive"));
    }
    let kt = c.thermal_energy(temperature);
    let mut mixed = 0.0;
    for (p, s) in e.probabilities.iter().zip(&e.states) {
        mixed += p * vn_entropy(s)?;
    }
    let q_martin = kt * mixed;
    let q_amy = kt * vn_entropy(&average_state(e)?)?;
    Ok(ErasureBudget {
        q_martin,
        q_amy,
        q_shared: q_amy - q_martin,
    })
}
