use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("eigendecomposition of the Gram matrix did not converge")]
    EigenFailure,

    #[error("adaptive quadrature did not converge to tolerance {tol} (best estimate {estimate})")]
    QuadratureNonConvergence { tol: f64, estimate: f64 },

    #[error(
        "Euler step size {dt} violates the stability bound {bound} (lambda_max {lambda_max}, eta_max {eta_max})"
    )]
    EulerUnstable {
        dt: f64,
        bound: f64,
        lambda_max: f64,
        eta_max: f64,
    },

    #[error("channel file parse error: {0}")]
    ChannelParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
