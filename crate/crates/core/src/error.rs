use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("shape mismatch: expected {expected}, got {found}")]
    Shape { expected: String, found: String },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("basis is rank deficient: smallest singular value {smallest:e} below {threshold:e}")]
    RankDeficient { smallest: f64, threshold: f64 },

    #[error("space is already complexified")]
    AlreadyComplexified,

    #[error("operation requires a complexified space")]
    NotComplexified,

    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),

    #[error("map is not idempotent: max |P^2 - P| = {defect:e}")]
    NotIdempotent { defect: f64 },

    #[error("closure failed: residual {residual:e} exceeds {tol:e} ({what})")]
    NotClosed {
        what: String,
        residual: f64,
        tol: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("iteration limit reached: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(expected: impl Into<String>, found: impl Into<String>) -> Error {
    Error::Shape {
        expected: expected.into(),
        found: found.into(),
    }
}
