//! Equilibrium thermodynamics of a quantum oscillator coupled to an Ohmic
//! (Drude-regularized) heat bath.
//!
//! The crate computes the reduced-state moments `<q^2>`, `<p^2>` of the
//! oscillator by two independent continuum routes (Matsubara sums and the
//! fluctuation-dissipation integral) and certifies them against an explicit
//! finite bath that is diagonalized exactly. On top of the moments it
//! integrates entropy changes and heat along parameter paths, which shows
//! the apparent breakdown of the Clausius inequality for a mass change at
//! low temperature and strong coupling, and its restoration once the
//! coupling step is accounted for.
//!
//! The [`info`] module holds the information-theoretic side: von Neumann
//! entropy, Holevo quantity, measurement mutual information, a search-based
//! lower bound on accessible information and the erasure-heat budget.
//!
//! All internal arithmetic is in natural units (`hbar = k_B = 1` by default,
//! see [`Constants`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod cli;
pub mod error;
pub mod gaussian;
pub mod info;
pub mod oracle;
pub mod quadrature;
pub mod thermo;
pub mod units;

pub use bath::{BathSpec, MomentRoute, Parameter};
pub use error::{Error, Result};
pub use gaussian::{Moments, OscillatorParams, SymplecticParam};
pub use thermo::{ComposedReport, ProcessPath, ThermoReport};
pub use units::Constants;
