use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}{}", ctx(context))]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    /// Probability has leaked to the edge of a truncated Fock space beyond
    /// the configured threshold; results past this point are untrustworthy.
    #[error("truncation error: tail mass {tail:.3e} exceeds threshold {threshold:.3e}")]
    TruncationError { tail: f64, threshold: f64 },

    #[error("non-finite entries in matrix input")]
    NonFinite,

    #[error("time {t} outside the spec horizon [0, {horizon}]")]
    TimeOutOfHorizon { t: f64, horizon: f64 },

    /// The step-halving acceptance check of the fixed-step integrator did not
    /// converge below the requested tolerance.
    #[error("step control failure: residual {residual:.3e} > tol {tol:.3e} at step {h:.3e}")]
    StepControlFailure { residual: f64, tol: f64, h: f64 },

    #[error("linear algebra backend: {0}")]
    Linalg(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn ctx(context: &&'static str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
