//! Hybrid string/embedding similarity.
//!
//! Predicates and constants are compared by exact string equality when
//! possible and by scaled cosine similarity of their embeddings otherwise.
//! Merge nodes are always compared by embedding.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

/// Label carried by every merge node.
pub const MERGE_MARKER: &str = "MERGE";

/// Alternate spelling of [`MERGE_MARKER`] accepted on input.
pub const MERGE_MARKER_ALT: &str = "MERGED";

pub fn is_merge_marker(symbol: &str) -> bool {
    symbol == MERGE_MARKER || symbol == MERGE_MARKER_ALT
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("embedding dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cannot average an empty list of embeddings")]
    EmptyInput,
    #[error("embedding has no components")]
    ZeroDimension,
    #[error("embedding component {index} is not finite")]
    NonFinite { index: usize },
}

/// A fixed-length real vector attached to an AMR node or logic symbol.
///
/// The norm and a bit-level fingerprint are computed once at construction,
/// so cloning is a reference-count bump.
#[derive(Clone)]
pub struct Embedding {
    values: Arc<[f64]>,
    norm: f64,
    fingerprint: u64,
}

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self, SimilarityError> {
        if values.is_empty() {
            return Err(SimilarityError::ZeroDimension);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SimilarityError::NonFinite { index });
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut hasher = Fnv1a::default();
        for v in &values {
            hasher.write_u64(v.to_bits());
        }
        Ok(Self {
            values: values.into(),
            norm,
            fingerprint: hasher.finish(),
        })
    }

    pub fn from_f32(values: &[f32]) -> Result<Self, SimilarityError> {
        Self::new(values.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_zero(&self) -> bool {
        self.norm == 0.0
    }

    /// Stable hash of the exact component bits.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

impl PartialEq for Embedding {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint && self.values == other.values
    }
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Embedding(dim={}, fp={:016x})", self.dimension(), self.fingerprint)
    }
}

// std's DefaultHasher makes no stability promise across releases.
#[derive(Default)]
struct Fnv1a(Option<u64>);

impl Hasher for Fnv1a {
    fn finish(&self) -> u64 {
        self.0.unwrap_or(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        let mut h = self.finish();
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.0 = Some(h);
    }
}

/// Cosine similarity; a zero vector has cosine 0 with everything.
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64, SimilarityError> {
    if a.dimension() != b.dimension() {
        return Err(SimilarityError::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    if a.is_zero() || b.is_zero() {
        return Ok(0.0);
    }
    let dot: f64 = a.values.iter().zip(b.values.iter()).map(|(x, y)| x * y).sum();
    Ok((dot / (a.norm * b.norm)).clamp(-1.0, 1.0))
}

/// Cosine mapped from [-1, 1] onto [0, 1].
pub fn scaled_cosine(a: &Embedding, b: &Embedding) -> Result<f64, SimilarityError> {
    Ok(((cosine(a, b)? + 1.0) / 2.0).clamp(0.0, 1.0))
}

/// Elementwise arithmetic mean.
pub fn average_embeddings(vs: &[Embedding]) -> Result<Embedding, SimilarityError> {
    let weighted: Vec<(&Embedding, usize)> = vs.iter().map(|v| (v, 1)).collect();
    weighted_average(&weighted)
}

/// Mean where each vector stands for `weight` identical members.
///
/// Used when a region being merged already contains a merge node: that node
/// contributes its average once per embedding it absorbed.
pub fn weighted_average(vs: &[(&Embedding, usize)]) -> Result<Embedding, SimilarityError> {
    let (first, _) = vs.first().ok_or(SimilarityError::EmptyInput)?;
    let dim = first.dimension();
    let mut acc = vec![0.0; dim];
    let mut total = 0usize;
    for (v, w) in vs {
        if v.dimension() != dim {
            return Err(SimilarityError::DimensionMismatch {
                left: dim,
                right: v.dimension(),
            });
        }
        for (a, x) in acc.iter_mut().zip(v.values.iter()) {
            *a += x * (*w as f64);
        }
        total += w;
    }
    if total == 0 {
        return Err(SimilarityError::EmptyInput);
    }
    for a in &mut acc {
        *a /= total as f64;
    }
    Embedding::new(acc)
}

/// A predicate or constant as seen by unification.
#[derive(Clone, Debug)]
pub struct Symbol {
    pub name: String,
    pub embedding: Option<Embedding>,
}

impl Symbol {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            embedding: None,
        }
    }

    pub fn with_embedding(name: impl Into<String>, embedding: Option<Embedding>) -> Self {
        Self {
            name: name.into(),
            embedding,
        }
    }

    pub fn is_merge(&self) -> bool {
        is_merge_marker(&self.name)
    }
}

// Identity is the name plus the embedding fingerprint: two symbols that
// print the same but carry different vectors are different symbols.
impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.embedding.as_ref().map(Embedding::fingerprint)
                == other.embedding.as_ref().map(Embedding::fingerprint)
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
        self.embedding.as_ref().map(Embedding::fingerprint).hash(state);
    }
}

/// Similarity between two symbols, in [0, 1].
pub trait SimilarityFn: Sync {
    fn similarity(&self, a: &Symbol, b: &Symbol) -> Result<f64, SimilarityError>;
}

/// The hybrid string/embedding similarity.
#[derive(Clone, Copy, Debug, Default)]
pub struct HybridSimilarity;

impl SimilarityFn for HybridSimilarity {
    fn similarity(&self, a: &Symbol, b: &Symbol) -> Result<f64, SimilarityError> {
        hybrid_similarity(a, b)
    }
}

/// 1.0 on identical strings, 0.0 otherwise. Embeddings are ignored.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactMatch;

impl SimilarityFn for ExactMatch {
    fn similarity(&self, a: &Symbol, b: &Symbol) -> Result<f64, SimilarityError> {
        Ok(if a.name == b.name { 1.0 } else { 0.0 })
    }
}

pub fn hybrid_similarity(a: &Symbol, b: &Symbol) -> Result<f64, SimilarityError> {
    let both = match (&a.embedding, &b.embedding) {
        (Some(x), Some(y)) => Some((x, y)),
        _ => None,
    };
    if a.is_merge() || b.is_merge() {
        return match both {
            Some((x, y)) => scaled_cosine(x, y),
            None => Ok(0.0),
        };
    }
    if a.name == b.name {
        return Ok(1.0);
    }
    match both {
        Some((x, y)) => scaled_cosine(x, y),
        None => Ok(0.0),
    }
}
