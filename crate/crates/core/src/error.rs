//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or arity mismatch between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input lies outside the mathematical domain of the operation.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Checked integer arithmetic overflowed.
    #[error("integer overflow: {0}")]
    Overflow(String),

    /// A lattice basis (or parameter block) is rank-deficient.
    #[error("rank-deficient basis: {0}")]
    Rank(String),

    /// The operation is not defined for the given variant.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed textual input (polynomial grammar, numbers).
    #[error("parse error: {0}")]
    Parse(String),

    /// Invalid configuration or constructor argument.
    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
