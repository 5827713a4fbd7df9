use thiserror::Error;

/// Errors raised by the kernel, the model layer, the constructions and the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (min eigenvalue {min_eig:.3e}, threshold {threshold:.3e})")]
    NotPositiveDefinite { min_eig: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("exponent {t} not supported here: {reason}")]
    WrongExponent { t: String, reason: String },

    #[error("variable `{0}` has no assigned value")]
    MissingAssignment(String),

    #[error("model contains complex data or Hermitian variables; realify it first")]
    ComplexData,

    #[error("solver requires a realified model")]
    NotRealified,

    #[error("model has no objective")]
    NoObjective,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid matrix document: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }

    pub(crate) fn wrong_exponent(t: impl ToString, reason: impl Into<String>) -> Self {
        Error::WrongExponent {
            t: t.to_string(),
            reason: reason.into(),
        }
    }
}
