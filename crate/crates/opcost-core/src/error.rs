//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Vector/matrix dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Input is degenerate for the requested statistic (e.g. constant labels).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A linear system had no unique solution.
    #[error("singular system: {0}")]
    Singular(String),

    /// Optimization problem has no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Optimization problem is unbounded in the optimization direction.
    #[error("unbounded: {0}")]
    Unbounded(String),

    /// A computation was refused because its predicted size exceeds a cap.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// The requested combination of parameters is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
