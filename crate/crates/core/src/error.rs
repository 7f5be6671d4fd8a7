use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines and the command-line frontend.
#[derive(Debug, Error)]
pub enum HkError {
    #[error(
        "quadrature did not converge: value {value}, error estimate {error_estimate:e} after {subdivisions} subdivisions \
         (raise the working precision or the subdivision budget)"
    )]
    NonConvergence { value: Complex64, error_estimate: f64, subdivisions: usize },

    #[error("invalid configuration for `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("phase unwrapping failed near tau = {tau}: increment {increment:.3} rad after {refinements} grid refinements")]
    UnwrapFailure { tau: f64, increment: f64, refinements: u32 },

    #[error("insufficient data: need at least {needed} samples in the window, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HkError {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        HkError::InvalidConfig { field, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, HkError>;
