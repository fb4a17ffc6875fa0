//! Merged tree variants.
//!
//! A merge replaces an instance node and everything below it with a single
//! merge node carrying the mean of the collapsed embeddings. A merge must not
//! remove a negation, must not split an instance from its coreferences, and
//! is bounded in width (embeddings averaged) and depth.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amr::{AmrError, AmrNode, AmrTree, Edge, NodeId};
use crate::similarity::{weighted_average, Embedding, SimilarityError};

/// How a limit is compared against the measured value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Inclusive,
    Strict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeConfig {
    /// Upper limit on the number of embeddings averaged into one merge node.
    pub max_merge_width: usize,
    /// `Strict` allows widths `< max_merge_width`, `Inclusive` allows `<=`.
    pub width_bound: Bound,
    /// Merge nodes may not sit shallower than this.
    pub min_merge_depth: usize,
    /// `Inclusive` allows depth `>= min_merge_depth`, `Strict` requires `>`.
    pub depth_bound: Bound,
    /// Enumeration stops after this many trees (original included).
    pub max_variants: usize,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self {
            max_merge_width: 6,
            width_bound: Bound::Strict,
            min_merge_depth: 1,
            depth_bound: Bound::Inclusive,
            max_variants: 10_000,
        }
    }
}

impl MergeConfig {
    pub fn validate(&self) -> Result<(), MergeError> {
        if self.max_merge_width == 0 {
            return Err(MergeError::InvalidConfig("max_merge_width must be at least 1".into()));
        }
        if self.max_variants == 0 {
            return Err(MergeError::InvalidConfig("max_variants must be at least 1".into()));
        }
        Ok(())
    }

    pub fn width_allowed(&self, width: usize) -> bool {
        match self.width_bound {
            Bound::Strict => width < self.max_merge_width,
            Bound::Inclusive => width <= self.max_merge_width,
        }
    }

    pub fn depth_allowed(&self, depth: usize) -> bool {
        match self.depth_bound {
            Bound::Strict => depth > self.min_merge_depth,
            Bound::Inclusive => depth >= self.min_merge_depth,
        }
    }
}

/// Why a merge target was rejected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MergeViolation {
    #[error("target is not an instance node")]
    NotAnInstance,
    #[error("merge would remove a negation")]
    RemovesNegation,
    #[error("merge would separate {0:?} from its coreferences")]
    BreaksCoreference(String),
    #[error("merge width {width} exceeds the limit {max}")]
    TooWide { width: usize, max: usize },
    #[error("merge depth {depth} is below the minimum {min}")]
    TooShallow { depth: usize, min: usize },
    #[error("collapsed region has no embeddings")]
    NoEmbeddings,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MergeError {
    #[error("invalid merge: {0}")]
    InvalidMerge(MergeViolation),
    #[error("collapsed region has no embeddings")]
    NoEmbeddings,
    #[error("collapsability is undefined for a single-node tree")]
    UndefinedCollapsability,
    #[error("invalid merge configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Tree(#[from] AmrError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Number of embeddings a merge of `target` would average. Existing merge
/// nodes count once per embedding they already absorbed.
pub fn merge_width(tree: &AmrTree, target: NodeId) -> usize {
    tree.subtree(target)
        .map(|id| match tree.node(id) {
            AmrNode::Merge { width, .. } => *width,
            n if n.embedding().is_some() => 1,
            _ => 0,
        })
        .sum()
}

/// First rule a merge of `target` breaks, if any.
pub fn merge_violation(tree: &AmrTree, target: NodeId, config: &MergeConfig) -> Option<MergeViolation> {
    if !tree.node(target).is_instance() {
        return Some(MergeViolation::NotAnInstance);
    }
    let inside = |id: NodeId| id == target || tree.is_descendant(id, target);
    if tree.subtree(target).any(|id| tree.is_negated(id)) {
        return Some(MergeViolation::RemovesNegation);
    }
    for (label, refs) in tree.coreferences() {
        let Some(def) = tree.instance_by_label(label) else {
            continue;
        };
        let def_in = inside(def);
        if refs.iter().any(|&r| inside(r) != def_in) {
            return Some(MergeViolation::BreaksCoreference(label.to_string()));
        }
    }
    let width = merge_width(tree, target);
    if width == 0 {
        return Some(MergeViolation::NoEmbeddings);
    }
    if !config.width_allowed(width) {
        return Some(MergeViolation::TooWide {
            width,
            max: config.max_merge_width,
        });
    }
    let depth = tree.depth(target);
    if !config.depth_allowed(depth) {
        return Some(MergeViolation::TooShallow {
            depth,
            min: config.min_merge_depth,
        });
    }
    None
}

pub fn is_valid_merge(tree: &AmrTree, target: NodeId, config: &MergeConfig) -> bool {
    merge_violation(tree, target, config).is_none()
}

/// Collapses `target` and its descendants into one merge node.
pub fn apply_merge(tree: &AmrTree, target: NodeId, config: &MergeConfig) -> Result<AmrTree, MergeError> {
    match merge_violation(tree, target, config) {
        None => collapse(tree, &[target]),
        Some(MergeViolation::NoEmbeddings) => Err(MergeError::NoEmbeddings),
        Some(v) => Err(MergeError::InvalidMerge(v)),
    }
}

/// Collapses each target without checking merge rules. Targets must be
/// instance nodes whose subtrees are disjoint.
pub(crate) fn collapse(tree: &AmrTree, targets: &[NodeId]) -> Result<AmrTree, MergeError> {
    let mut nodes = Vec::with_capacity(tree.len());
    let mut new_id = vec![None; tree.len()];
    let mut skip_until = 0usize;
    for (id, node) in tree.nodes() {
        if id.index() < skip_until {
            continue;
        }
        new_id[id.index()] = Some(NodeId(nodes.len()));
        if targets.contains(&id) {
            let var = node
                .variable()
                .ok_or(MergeError::InvalidMerge(MergeViolation::NotAnInstance))?
                .to_string();
            let parts: Vec<(&Embedding, usize)> = tree
                .subtree(id)
                .filter_map(|d| match tree.node(d) {
                    AmrNode::Merge { embedding, width, .. } => Some((embedding, *width)),
                    n => n.embedding().map(|e| (e, 1)),
                })
                .collect();
            if parts.is_empty() {
                return Err(MergeError::NoEmbeddings);
            }
            let width = parts.iter().map(|(_, w)| w).sum();
            nodes.push(AmrNode::Merge {
                var,
                embedding: weighted_average(&parts)?,
                width,
            });
            skip_until = tree.subtree(id).last().map_or(0, |l| l.index() + 1);
        } else {
            nodes.push(node.clone());
        }
    }
    let edges = tree
        .edges()
        .iter()
        .filter_map(|e| {
            Some(Edge {
                source: new_id[e.source.index()]?,
                target: new_id[e.target.index()]?,
                role: e.role.clone(),
                inverse: e.inverse,
            })
        })
        .collect();
    Ok(AmrTree::from_parts(nodes, edges)?)
}

/// One merged variant and the labels of the instances collapsed to make it.
#[derive(Clone, Debug, PartialEq)]
pub struct MergedTree {
    pub tree: AmrTree,
    pub targets: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergeTreeSet {
    pub original: AmrTree,
    /// Distinct merged trees, each with at least one merge node.
    pub variants: Vec<MergedTree>,
    /// Set when enumeration stopped at `max_variants`.
    pub truncated: bool,
}

impl MergeTreeSet {
    /// Original first, then the variants in enumeration order.
    pub fn trees(&self) -> impl Iterator<Item = &AmrTree> + '_ {
        std::iter::once(&self.original).chain(self.variants.iter().map(|v| &v.tree))
    }

    pub fn len(&self) -> usize {
        1 + self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_nodes(&self) -> usize {
        self.trees().map(AmrTree::len).min().unwrap_or(0)
    }

    pub fn max_nodes(&self) -> usize {
        self.trees().map(AmrTree::len).max().unwrap_or(0)
    }

    /// `1 - (minNodes - 1) / (maxNodes - 1)` over this set.
    pub fn collapsability(&self) -> Result<f64, MergeError> {
        if self.original.len() <= 1 {
            return Err(MergeError::UndefinedCollapsability);
        }
        let min = self.min_nodes() as f64;
        let max = self.max_nodes() as f64;
        Ok(1.0 - (min - 1.0) / (max - 1.0))
    }
}

/// Every tree reachable by zero or more valid merges, deduplicated.
///
/// Merges commute and an ancestor merge absorbs any merge below it, so the
/// reachable trees are exactly those obtained by collapsing an antichain of
/// individually valid targets. Antichains are generated depth-first in
/// preorder with the all-kept choice first, which puts the original first.
pub fn enumerate_merge_trees(tree: &AmrTree, config: &MergeConfig) -> Result<MergeTreeSet, MergeError> {
    config.validate()?;
    let valid: Vec<bool> = tree.node_ids().map(|id| is_valid_merge(tree, id, config)).collect();
    let mut truncated = false;
    let choices = antichains(tree, tree.root(), &valid, config.max_variants, &mut truncated);

    let mut seen = HashSet::new();
    seen.insert(tree.canonical_key());
    let mut variants = Vec::new();
    for targets in choices.into_iter().filter(|c| !c.is_empty()) {
        let merged = collapse(tree, &targets)?;
        if seen.insert(merged.canonical_key()) {
            variants.push(MergedTree {
                targets: targets.iter().map(|&t| tree.node(t).label().to_string()).collect(),
                tree: merged,
            });
        }
    }
    Ok(MergeTreeSet {
        original: tree.clone(),
        variants,
        truncated,
    })
}

fn antichains(
    tree: &AmrTree,
    id: NodeId,
    valid: &[bool],
    cap: usize,
    truncated: &mut bool,
) -> Vec<Vec<NodeId>> {
    let mut combos: Vec<Vec<NodeId>> = vec![Vec::new()];
    for edge in tree.children(id) {
        if !tree.node(edge.target).is_instance() {
            continue;
        }
        let below = antichains(tree, edge.target, valid, cap, truncated);
        if below.len() == 1 {
            continue;
        }
        let mut next = Vec::with_capacity(combos.len() * below.len());
        'outer: for a in &combos {
            for b in &below {
                if next.len() >= cap {
                    *truncated = true;
                    break 'outer;
                }
                next.push(a.iter().chain(b.iter()).copied().collect());
            }
        }
        combos = next;
    }
    if valid[id.index()] {
        if combos.len() >= cap {
            *truncated = true;
        } else {
            combos.push(vec![id]);
        }
    }
    combos
}

/// Collapsability of `tree` under `config`; see [`MergeTreeSet::collapsability`].
pub fn collapsability(tree: &AmrTree, config: &MergeConfig) -> Result<f64, MergeError> {
    if tree.len() <= 1 {
        return Err(MergeError::UndefinedCollapsability);
    }
    enumerate_merge_trees(tree, config)?.collapsability()
}
