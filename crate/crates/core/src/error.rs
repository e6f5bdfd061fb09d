use thiserror::Error;

/// Errors produced by the kernel library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The Gegenbauer index is not supported by this operation.
    #[error("unsupported Gegenbauer index lambda = {lambda}: {hint}")]
    UnsupportedIndex { lambda: f64, hint: &'static str },

    /// A request would need more memory or time than the library allows.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A kernel returned a non-finite sample.
    #[error("kernel evaluation produced a non-finite value at x = {x}")]
    Evaluation { x: f64 },

    /// Adaptive refinement stopped before reaching the requested tolerance.
    #[error(
        "adaptive quadrature did not converge: achieved {achieved:e}, requested {requested:e}"
    )]
    Accuracy { achieved: f64, requested: f64 },

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// An internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
