use thiserror::Error;

use crate::topology::NodeId;

/// Errors raised by the embedding engine and its supporting machinery.
///
/// Rejection of a virtual network request is *not* an error; embedders
/// report it through [`crate::pso::RejectReason`].
#[derive(Debug, Clone, Error, PartialEq)]
pub enum VneError {
    /// A parameter or input violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A text document could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A virtual node has no admissible substrate host left.
    #[error("no candidate substrate node for virtual node {virtual_node}")]
    NoCandidate { virtual_node: NodeId },

    /// A request can never be placed under the given resource bound.
    #[error("unsatisfiable: {0}")]
    Unsatisfiable(String),

    /// An internal consistency check failed (strict simulation mode).
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, VneError>;
