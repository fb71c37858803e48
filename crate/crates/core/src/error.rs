//! Crate-wide error type.

use thiserror::Error;

use crate::model::ValidationReport;

/// Diagnostics attached to a solver failure.
#[derive(Debug, Clone)]
pub struct SolverFailure {
    /// Iterations spent before giving up.
    pub iterations: u64,
    /// Largest KKT violation at the point of failure.
    pub violation: f64,
    /// Primal-dual gap at the point of failure.
    pub gap: f64,
    /// Imputed test score being solved for, when applicable.
    pub imputed: Option<f64>,
}

#[derive(Debug, Error)]
pub enum Error {
    /// Dataset failed validation; carries the full list of violations.
    #[error(transparent)]
    Validation(#[from] ValidationReport),

    /// A precondition on an operation's inputs does not hold.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration value outside its legal range.
    #[error("invalid config: {0}")]
    Config(String),

    /// The dual solver did not reach the requested tolerance.
    #[error(
        "solver did not converge after {} iterations (violation {:.3e}, gap {:.3e}{})",
        .0.iterations,
        .0.violation,
        .0.gap,
        .0.imputed.map(|s| format!(", imputed score {s}")).unwrap_or_default()
    )]
    SolverNonConvergence(SolverFailure),

    /// File or stream error while reading/writing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed file content; message includes file and line where known.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
