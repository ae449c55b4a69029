//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file (row/column context in the message).
    #[error("parse error: {0}")]
    Parse(String),

    /// A contract violation on operation inputs.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Dimension disagreement between paired structures.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A column with zero variance where variation is required.
    #[error("column {index} ({id}) is constant; correlation is undefined")]
    ConstantColumn { index: usize, id: String },

    /// Nothing left to operate on.
    #[error("empty input: {0}")]
    Empty(String),

    /// Iterative solver failed to reach the gradient tolerance.
    #[error("solver did not converge after {iterations} iterations (gradient max-norm {grad_norm:.3e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
