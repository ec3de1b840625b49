//! Error type shared across the library.

use thiserror::Error;

/// Unified error for planning, parsing, and benchmarking operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A scenario failed validation; names the offending field.
    #[error("invalid scenario field `{field}`: {reason}")]
    InvalidScenario { field: String, reason: String },

    /// Input text (JSON config or scenario) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Vector dimensions disagree with what the system expects.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Numerical integration produced a non-finite value.
    #[error("propagation diverged: {0}")]
    PropagationDiverged(String),

    /// The requested operation is not defined for this input
    /// (e.g. asking for an analytic optimum of a scenario that has none).
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
