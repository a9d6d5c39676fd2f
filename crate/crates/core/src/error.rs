use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid vector entry at index {index}: {value} ({reason})")]
    InvalidEntry {
        index: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("rate caps are required for the capped load mapping")]
    MissingCaps,

    #[error("asymptotic estimate did not converge: last inter-rung deviation {deviation:e} at scale {scale:e}")]
    AsymptoticNonConvergence { deviation: f64, scale: f64 },

    #[error("mapping produced a non-finite value at scale {scale:e}")]
    NonFinite { scale: f64 },

    #[error("linear-power spectral radius requires an exact linear asymptotic mapping")]
    NotLinear,

    #[error("budget-ladder spectral radius requires the base interference mapping")]
    MissingBaseMapping,

    #[error("budget ladder did not converge: last relative change {change:e}")]
    LadderNonConvergence { change: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
