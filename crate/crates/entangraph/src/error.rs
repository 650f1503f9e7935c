//! Crate-wide error type.

use thiserror::Error;

use crate::tensor::Label;

/// Errors raised by register construction, linear algebra, analysis, graph
/// rewriting, and protocol execution.
#[derive(Debug, Error)]
pub enum Error {
    /// Total register dimension exceeds the configured cap.
    #[error("register capacity exceeded: total dimension {total} exceeds cap {cap}")]
    Capacity { total: usize, cap: usize },

    /// A party label is not part of the register or graph at hand.
    #[error("unknown party label `{0}`")]
    UnknownLabel(Label),

    /// Malformed argument (empty cut, duplicate label, out-of-range angle, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An operation's precondition does not hold (non-Hermitian input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Numerical failure (eigensolver non-convergence, degenerate norms, ...).
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Textual input (state specs, polynomials, JSON files) failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
