//! Seeded random states, ensembles and measurements.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, DensityMatrix, Ensemble, Povm};
use crate::error::Result;

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn hermitize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()) * Complex64::from(0.5)
}

/// Haar-random pure state.
pub fn random_pure<R: Rng>(rng: &mut R, dim: usize) -> Result<DensityMatrix> {
    let mut psi: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    DensityMatrix::pure(&psi)
}

/// Hilbert-Schmidt random mixed state `G G^dag / tr`.
pub fn random_mixed<R: Rng>(rng: &mut R, dim: usize) -> Result<DensityMatrix> {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let w = &g * g.adjoint();
    let tr = w.trace();
    DensityMatrix::new(hermitize(w / tr))
}

/// `states` members, each pure or mixed with equal odds, with flat random weights.
pub fn random_ensemble<R: Rng>(rng: &mut R, dim: usize, states: usize) -> Result<Ensemble> {
    let raw: Vec<f64> = (0..states).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
    // Put the rounding residue on the last weight so the sum is exactly 1.
    let head: f64 = probs[..states - 1].iter().sum();
    probs[states - 1] = 1.0 - head;
    let members = (0..states)
        .map(|_| {
            if rng.random::<bool>() {
                random_pure(rng, dim)
            } else {
                random_mixed(rng, dim)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(probs, members)
}

/// POVM `E_m = S^-1/2 A_m S^-1/2` from random positive `A_m`, `S = sum_m A_m`.
pub fn random_povm<R: Rng>(rng: &mut R, dim: usize, outcomes: usize) -> Result<Povm> {
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
            &g * g.adjoint()
        })
        .collect();
    let sum = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, a| acc + a);
    let eig = SymmetricEigen::new(hermitize(sum));
    let scale = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from(1.0 / l.sqrt())));
    let inv_sqrt = &eig.eigenvectors * scale * eig.eigenvectors.adjoint();
    Povm::new(
        raw.iter()
            .map(|a| hermitize(&inv_sqrt * a * &inv_sqrt))
            .collect(),
    )
}
