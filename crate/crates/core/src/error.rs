use thiserror::Error;

/// Errors raised by the distribution, estimation and goodness-of-fit routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("survival function underflows at t = {t:e}")]
    SurvivalUnderflow { t: f64 },

    #[error("quadrature did not converge: {nodes} nodes gave {coarse:e}, {fine_nodes} gave {fine:e}")]
    QuadratureNonConvergence {
        nodes: usize,
        coarse: f64,
        fine_nodes: usize,
        fine: f64,
    },

    #[error("fit has not converged; standard errors are not available")]
    NotConverged,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_time(t: f64) -> Result<f64> {
    if t > 0.0 && !t.is_nan() {
        Ok(t)
    } else {
        Err(Error::Domain(format!("lifetime must be > 0, got {t}")))
    }
}
