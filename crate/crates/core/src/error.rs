use thiserror::Error;

/// Errors raised by evaluation routines and problem construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("triplet mid component must lie between low and high, got ({low}, {mid}, {high})")]
    TripletOrder { low: f64, mid: f64, high: f64 },

    #[error("triplet components must be finite, got ({low}, {mid}, {high})")]
    NonFinite { low: f64, mid: f64, high: f64 },

    #[error("variable {index} must be strictly positive, got {value}")]
    NonPositiveVariable { index: usize, value: f64 },

    #[error("dual weight {index} must be nonnegative, got {value}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("dual weight {index} must be strictly positive for the gradient, got {value}")]
    ZeroWeight { index: usize, value: f64 },

    #[error("expected a vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("problem is invalid: {0}")]
    Invalid(String),
}
