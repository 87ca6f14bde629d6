//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by merging, fitting, search, and I/O operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("pretrained parameter vector has zero L1 norm")]
    DegeneratePretrained,

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("metric {task} value {value} outside declared range [{lower}, {upper}]")]
    RangeViolation {
        task: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("design matrix is rank-deficient beyond ridge rescue")]
    SingularDesign,

    #[error("record store is empty")]
    EmptyStore,

    #[error("input point set is empty")]
    EmptyInput,

    #[error("Pareto front is empty")]
    EmptyFront,

    #[error("need at least two nodes, got {got}")]
    TooFewNodes { got: usize },

    #[error("coefficient vector is zero; angular bin undefined")]
    ZeroVector,

    #[error("coefficient {index} is negative ({value}); angular binning requires the nonnegative orthant")]
    NegativeCoordinate { index: usize, value: f64 },

    #[error("evaluation budget exceeded: cap {cap}, requested total {requested}")]
    BudgetExceeded { cap: u64, requested: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
