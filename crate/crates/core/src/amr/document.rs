use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::similarity::{average_embeddings, Embedding, SimilarityError};

use super::penman::parse_penman;
use super::tree::{normalize, AmrNode, AmrTree, NodeId, NodePath, NEGATION_SYMBOL, POLARITY_ROLE};
use super::AmrError;

/// One parsed sentence with token alignments and contextual token vectors,
/// as written by the ingestion step (one JSON object per file).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignedAmrDocument {
    pub id: String,
    pub text: String,
    pub penman: String,
    pub tokens: Vec<String>,
    /// Node path (see [`NodePath`]) to aligned token indices.
    pub node_alignments: BTreeMap<String, Vec<usize>>,
    /// One row per token.
    pub token_embeddings: Vec<Vec<f32>>,
}

impl AlignedAmrDocument {
    pub fn from_json(json: &str) -> Result<Self, AmrError> {
        serde_json::from_str(json).map_err(|e| AmrError::Document(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AmrError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| AmrError::Document(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document serializes")
    }

    /// Embedding dimension, or `None` when there are no tokens.
    pub fn dimension(&self) -> Option<usize> {
        self.token_embeddings.first().map(Vec::len)
    }

    /// Checks the document invariants and returns the raw parsed tree.
    pub fn validate(&self) -> Result<AmrTree, AmrError> {
        let tree = parse_penman(&self.penman)?;
        if self.token_embeddings.len() != self.tokens.len() {
            return Err(AmrError::Document(format!(
                "{} tokens but {} embedding rows",
                self.tokens.len(),
                self.token_embeddings.len()
            )));
        }
        if let Some(dim) = self.dimension() {
            if dim == 0 {
                return Err(AmrError::Document("embedding rows are empty".into()));
            }
            for (i, row) in self.token_embeddings.iter().enumerate() {
                if row.len() != dim {
                    return Err(AmrError::DimensionMismatch {
                        expected: dim,
                        found: row.len(),
                    });
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(AmrError::Document(format!("token {i} has a non-finite value")));
                }
                if row.iter().all(|&v| v == 0.0) {
                    return Err(AmrError::Document(format!("token {i} has a zero vector")));
                }
            }
        }
        for (path, indices) in &self.node_alignments {
            let parsed: NodePath = path.parse()?;
            if tree.resolve_path(&parsed).is_none() {
                return Err(AmrError::AlignmentMismatch(path.clone()));
            }
            if let Some(&bad) = indices.iter().find(|&&i| i >= self.tokens.len()) {
                return Err(AmrError::Document(format!(
                    "alignment {path:?} uses token {bad} but there are {} tokens",
                    self.tokens.len()
                )));
            }
        }
        Ok(tree)
    }

    /// Parse, normalize, and attach embeddings.
    pub fn to_tree(&self) -> Result<AmrTree, AmrError> {
        let raw = self.validate()?;
        attach_embeddings(&normalize(&raw), self)
    }
}

fn same_shape(a: &AmrTree, b: &AmrTree) -> bool {
    a.len() == b.len()
        && a.edges().len() == b.edges().len()
        && a.edges()
            .iter()
            .zip(b.edges())
            .all(|(x, y)| x.source == y.source && x.target == y.target && x.surface_role() == y.surface_role())
        && a.nodes().zip(b.nodes()).all(|((_, x), (_, y))| {
            std::mem::discriminant(x) == std::mem::discriminant(y)
        })
}

/// Gives each aligned instance or constant node the mean of its tokens'
/// vectors. Unaligned nodes, coreferences, and the negation constant get
/// no embedding.
pub fn attach_embeddings(tree: &AmrTree, doc: &AlignedAmrDocument) -> Result<AmrTree, AmrError> {
    let doc_tree = parse_penman(&doc.penman)?;
    if !same_shape(tree, &doc_tree) {
        return Err(AmrError::AlignmentMismatch(format!(
            "document {} does not describe this tree",
            doc.id
        )));
    }
    let mut assigned: Vec<Option<Embedding>> = vec![None; tree.len()];
    let dim = doc.dimension();
    for (path, indices) in &doc.node_alignments {
        let parsed: NodePath = path.parse()?;
        let id = tree
            .resolve_path(&parsed)
            .ok_or_else(|| AmrError::AlignmentMismatch(path.clone()))?;
        if indices.is_empty() || !receives_embedding(tree, id) {
            continue;
        }
        let mut rows = Vec::with_capacity(indices.len());
        for &i in indices {
            let row = doc.token_embeddings.get(i).ok_or_else(|| {
                AmrError::Document(format!("alignment {path:?} uses missing token {i}"))
            })?;
            if Some(row.len()) != dim {
                return Err(AmrError::DimensionMismatch {
                    expected: dim.unwrap_or(0),
                    found: row.len(),
                });
            }
            rows.push(Embedding::from_f32(row).map_err(AmrError::from)?);
        }
        assigned[id.index()] = Some(average_embeddings(&rows)?);
    }
    let nodes = tree
        .nodes()
        .map(|(id, n)| {
            let mut n = n.clone();
            if receives_embedding(tree, id) {
                n.set_embedding(assigned[id.index()].take());
            }
            n
        })
        .collect();
    Ok(tree.with_nodes(nodes))
}

fn receives_embedding(tree: &AmrTree, id: NodeId) -> bool {
    match tree.node(id) {
        AmrNode::Instance { .. } => true,
        AmrNode::Constant { value, quoted, .. } => {
            let polarity = tree.parent_edge(id).is_some_and(|e| e.role == POLARITY_ROLE);
            !(polarity && !quoted && value == NEGATION_SYMBOL)
        }
        _ => false,
    }
}

impl From<SimilarityError> for AmrError {
    fn from(e: SimilarityError) -> Self {
        match e {
            SimilarityError::DimensionMismatch { left, right } => AmrError::DimensionMismatch {
                expected: left,
                found: right,
            },
            other => AmrError::Document(other.to_string()),
        }
    }
}
