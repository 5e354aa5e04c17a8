use thiserror::Error;

pub type Result<T> = std::result::Result<T, CevmError>;

/// Error type shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum CevmError {
    /// A value that must be finite (or otherwise well-formed) was not.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Too few observations for the requested computation.
    #[error("insufficient data: need at least {required} observations, got {found}")]
    InsufficientData { required: usize, found: usize },

    /// Too few threshold exceedances for a conditional estimate.
    #[error("insufficient exceedances of t={threshold}: need at least {required}, got {found}")]
    InsufficientExceedances {
        threshold: f64,
        required: usize,
        found: usize,
    },

    /// A bracketed root find failed; carries the bracket for diagnostics.
    #[error("numeric inversion of {target} failed on [{lo}, {hi}]: {detail}")]
    NumericInversion {
        target: &'static str,
        lo: f64,
        hi: f64,
        detail: String,
    },

    /// No optimizer start converged.
    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),
}
