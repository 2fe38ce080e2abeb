use crate::dist::IntegerPmf;
use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A quantity was requested outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A free parameter violates its admissibility range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An exact enumeration would exceed the configured atom budget.
    /// Exceeding the budget is always an error, never a silent fallback.
    #[error("resource error: enumeration needs {atoms} atoms, budget is {budget}")]
    Resource { atoms: u128, budget: u64 },

    /// A config or instance description failed validation. `path` points at
    /// the offending field, e.g. `bounds[2].params.q`.
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    /// The input-distribution optimizer ran out of iterations. Carries the
    /// best iterate seen so the caller can inspect how close it got.
    #[error("optimizer did not converge after {iterations} iterations (last step {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best_value: f64,
        best_input: Box<IntegerPmf>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn validation(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: msg.into(),
        }
    }
}
