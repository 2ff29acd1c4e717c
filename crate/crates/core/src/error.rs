//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
///
/// The split mirrors how callers react: `InvalidArgument`/`Dimension`/`Size`
/// are caller bugs or bad inputs, `Capability` means the request is outside
/// what the implementation supports (an exactness cap, an unsupported file
/// flavour), and `Parse` carries enough position information to point a user
/// at the offending line of an input file.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    Dimension {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// Elections that must be the same size (candidates and/or voters) are not.
    #[error("size mismatch in {context}: {left} vs {right}")]
    Size {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// An input collection is empty where at least one element is required.
    #[error("empty input: {0}")]
    Empty(&'static str),

    /// Numerically or structurally degenerate input (zero-sum vector, all-zero
    /// distance matrix, and so on).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The request is valid but outside the supported envelope.
    #[error("unsupported: {0}")]
    Capability(String),

    /// A malformed input file; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// One or more cells of a pairwise computation failed. The matrix is not
    /// returned partially filled; every failing pair is listed.
    #[error("{} pairwise cell(s) failed; first: [{}] x [{}]: {}",
            failures.len(),
            failures.first().map(|f| f.left.as_str()).unwrap_or("?"),
            failures.first().map(|f| f.right.as_str()).unwrap_or("?"),
            failures.first().map(|f| f.message.as_str()).unwrap_or("?"))]
    Pairwise { failures: Vec<CellFailure> },
}

/// A single failed cell of a pairwise matrix computation.
#[derive(Debug, Clone)]
pub struct CellFailure {
    pub left: String,
    pub right: String,
    pub message: String,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
