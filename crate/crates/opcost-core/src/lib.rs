//! Decision-aware linear regression.
//!
//! Fits linear models whose training objective carries the optimal value of a
//! downstream decision problem as a regularization term, sweeps the
//! regularizer strength to map the cost range of near-equally-accurate
//! models, relates the pessimistic variant to robust optimization on convex
//! instances, and computes covering-number generalization bounds for linearly
//! constrained coefficient classes by exact integer-point counting.

pub mod bounds;
pub mod error;
pub mod optimizer;
pub mod model;
pub mod problems;
pub mod robust;
pub mod tol;

pub use error::{Error, Result};
