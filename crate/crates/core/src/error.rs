use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("moments violate the uncertainty bound: f1*f2 - cross^2 = {determinant:e} < hbar^2/4 = {bound:e}")]
    Uncertainty { determinant: f64, bound: f64 },

    #[error("numerical failure in {what}: {diagnostics}")]
    Numerical { what: &'static str, diagnostics: String },

    #[error("normal-mode analysis failed: {0}")]
    Eigen(String),

    #[error("non-positive normal-mode eigenvalue {eigenvalue:e} (counter-term broken?)")]
    UnstableMode { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn numerical(what: &'static str, diagnostics: impl Into<String>) -> Self {
        Error::Numerical {
            what,
            diagnostics: diagnostics.into(),
        }
    }

    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
