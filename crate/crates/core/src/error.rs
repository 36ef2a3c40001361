use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0} (must be at least 1)")]
    InvalidDimension(usize),

    #[error("invalid exponent p = {0}: must satisfy p >= 1")]
    InvalidExponent(f64),

    #[error("{operation} requires p >= 2, got p = {p}")]
    ExponentBelowTwo { operation: &'static str, p: f64 },

    #[error("{operation} requires a finite exponent")]
    InfiniteExponent { operation: &'static str },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error(
        "admissible delta window is empty: rad/(sqrt(d) L) = {ratio} is not below 2 \
         (small-diameter condition violated)"
    )]
    EmptyDeltaWindow { ratio: f64 },

    #[error("point {index} lies outside the body: ||x||_p = {norm} > {bound}")]
    PointOutsideBody { index: usize, norm: f64, bound: f64 },

    #[error("psi-norm bisection failed: empirical Orlicz mean is {mean} > 2 at lambda = {lambda}; increase n")]
    PsiNormNotBracketed { lambda: f64, mean: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
