//! AMR trees: Penman reading/writing, normalization, and node embeddings.

mod document;
mod penman;
mod tree;

use thiserror::Error;

pub use document::{attach_embeddings, AlignedAmrDocument};
pub use penman::{parse_penman, to_penman};
pub use tree::{
    normalize, normalize_inverse_roles, strip_frame, strip_frame_numbers, AmrNode, AmrTree, Edge,
    NodeId, NodePath, Orientation, NEGATION_SYMBOL, POLARITY_ROLE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmrError {
    #[error("malformed Penman at byte {offset}: {message}")]
    MalformedPenman { offset: usize, message: String },
    #[error("variable {0:?} is defined more than once")]
    DuplicateInstanceLabel(String),
    #[error("variable {0:?} is referenced but never defined")]
    DanglingCoreference(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("bad node path {0:?}")]
    BadNodePath(String),
    #[error("alignment does not match the tree: {0}")]
    AlignmentMismatch(String),
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid document: {0}")]
    Document(String),
}
