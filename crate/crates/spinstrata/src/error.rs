//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Interpolation nodes are not pairwise distinct.
    #[error("degenerate nodes")]
    DegenerateNodes,
    /// An input that must be non-empty was empty.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A value that must be strictly positive was not.
    #[error("non-positive entry: {0}")]
    NonPositive(i64),
    /// Text could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// A graph violates the stable-graph invariants.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    /// A signature or stratum is malformed.
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    /// A caller-side precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Polynomial interpolation in `r` failed its verification samples.
    #[error("r not in polynomial range: {0}")]
    Interpolation(String),
    /// A linear solve could not produce a unique answer.
    #[error("linear solve failed: {0}")]
    Solve(String),
    /// The requested class lies outside the evaluable range.
    #[error("symbolic: {0}")]
    Symbolic(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
