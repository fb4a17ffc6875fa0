use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::similarity::{Embedding, MERGE_MARKER};

use super::AmrError;

/// Roles that end in `-of` without being inverses.
const NON_INVERSE_OF_ROLES: &[&str] = &[":consist-of", ":prep-out-of", ":prep-on-behalf-of"];

pub const POLARITY_ROLE: &str = ":polarity";
pub const NEGATION_SYMBOL: &str = "-";

/// Index of a node inside one [`AmrTree`]. Ids are preorder positions, so
/// the root is always `NodeId(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AmrNode {
    Instance {
        label: String,
        predicate: String,
        embedding: Option<Embedding>,
    },
    Constant {
        value: String,
        /// Whether the value was written as a quoted string.
        quoted: bool,
        embedding: Option<Embedding>,
    },
    Coreference {
        label: String,
    },
    /// A collapsed subtree. `var` is the label of the instance node it replaced.
    Merge {
        var: String,
        embedding: Embedding,
        width: usize,
    },
}

impl AmrNode {
    pub fn instance(label: impl Into<String>, predicate: impl Into<String>) -> Self {
        AmrNode::Instance {
            label: label.into(),
            predicate: predicate.into(),
            embedding: None,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            AmrNode::Instance { label, .. } | AmrNode::Coreference { label } => label,
            AmrNode::Constant { value, .. } => value,
            AmrNode::Merge { .. } => MERGE_MARKER,
        }
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        match self {
            AmrNode::Instance { embedding, .. } | AmrNode::Constant { embedding, .. } => {
                embedding.as_ref()
            }
            AmrNode::Coreference { .. } => None,
            AmrNode::Merge { embedding, .. } => Some(embedding),
        }
    }

    pub fn is_instance(&self) -> bool {
        matches!(self, AmrNode::Instance { .. })
    }

    pub fn is_merge(&self) -> bool {
        matches!(self, AmrNode::Merge { .. })
    }

    pub fn is_coreference(&self) -> bool {
        matches!(self, AmrNode::Coreference { .. })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, AmrNode::Constant { .. })
    }

    /// Name of the logic variable bound to this node, if it introduces one.
    pub fn variable(&self) -> Option<&str> {
        match self {
            AmrNode::Instance { label, .. } => Some(label),
            AmrNode::Merge { var, .. } => Some(var),
            _ => None,
        }
    }

    pub(crate) fn set_embedding(&mut self, value: Option<Embedding>) {
        match self {
            AmrNode::Instance { embedding, .. } | AmrNode::Constant { embedding, .. } => {
                *embedding = value
            }
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    /// Role label without any inverse suffix once normalized.
    pub role: String,
    /// Set by [`normalize_inverse_roles`] when `role` was written as `role-of`.
    pub inverse: bool,
}

/// Role and argument order an edge contributes to a logic literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Orientation<'a> {
    pub role: &'a str,
    pub first: NodeId,
    pub second: NodeId,
}

impl Edge {
    /// The role as it appears in Penman text.
    pub fn surface_role(&self) -> String {
        if self.inverse {
            format!("{}-of", self.role)
        } else {
            self.role.clone()
        }
    }

    pub fn orientation(&self) -> Orientation<'_> {
        if self.inverse {
            Orientation {
                role: &self.role,
                first: self.target,
                second: self.source,
            }
        } else {
            Orientation {
                role: &self.role,
                first: self.source,
                second: self.target,
            }
        }
    }

    /// True for a role written `:x-of` that has not been normalized yet.
    pub fn has_unflagged_inverse(&self) -> bool {
        !self.inverse && is_inverse_role(&self.role)
    }
}

fn is_inverse_role(role: &str) -> bool {
    role.len() > 4 && role.ends_with("-of") && !NON_INVERSE_OF_ROLES.contains(&role)
}

/// Root-to-node address: one `(surface role, ordinal among same-role siblings)`
/// pair per edge. Serialized as `:ARG1.0/:ARG0.0`; the root is the empty path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(pub Vec<(String, usize)>);

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (role, ord)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{role}.{ord}")?;
        }
        Ok(())
    }
}

impl FromStr for NodePath {
    type Err = AmrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(NodePath::default());
        }
        let bad = || AmrError::BadNodePath(s.to_string());
        s.split('/')
            .map(|step| {
                let (role, ord) = step.rsplit_once('.').ok_or_else(bad)?;
                if !role.starts_with(':') || role.len() < 2 {
                    return Err(bad());
                }
                let ord = ord.parse::<usize>().map_err(|_| bad())?;
                Ok((role.to_string(), ord))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(NodePath)
    }
}

/// A rooted AMR tree with per-node metadata.
///
/// Nodes are stored in preorder; the edge into node `i` is found through
/// `parent`. Trees are immutable: every transformation builds a new tree.
#[derive(Clone, Debug, PartialEq)]
pub struct AmrTree {
    nodes: Vec<AmrNode>,
    edges: Vec<Edge>,
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    subtree_end: Vec<usize>,
}

impl AmrTree {
    /// Builds a tree from arbitrary node and edge lists, validating the tree
    /// invariants and renumbering nodes into preorder.
    pub fn from_parts(nodes: Vec<AmrNode>, edges: Vec<Edge>) -> Result<Self, AmrError> {
        if nodes.is_empty() {
            return Err(AmrError::InvalidTree("tree has no nodes".into()));
        }
        let n = nodes.len();
        let mut incoming = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.source.0 >= n || e.target.0 >= n {
                return Err(AmrError::InvalidTree(format!("edge {i} points outside the tree")));
            }
            if !e.role.starts_with(':') || e.role.len() < 2 {
                return Err(AmrError::InvalidTree(format!("bad role label {:?}", e.role)));
            }
            if !nodes[e.source.0].is_instance() {
                return Err(AmrError::InvalidTree(format!(
                    "edge {} leaves non-instance node {:?}",
                    e.role,
                    nodes[e.source.0].label()
                )));
            }
            incoming[e.target.0] += 1;
            out[e.source.0].push(i);
        }
        let roots: Vec<usize> = (0..n).filter(|&i| incoming[i] == 0).collect();
        if roots.len() != 1 {
            return Err(AmrError::InvalidTree(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        }
        if let Some(i) = incoming.iter().position(|&c| c > 1) {
            return Err(AmrError::InvalidTree(format!(
                "node {:?} has more than one parent",
                nodes[i].label()
            )));
        }

        // preorder renumbering
        let mut order = Vec::with_capacity(n);
        let mut edge_order = Vec::with_capacity(edges.len());
        let mut stack = vec![roots[0]];
        let mut seen = vec![false; n];
        while let Some(v) = stack.pop() {
            if seen[v] {
                return Err(AmrError::InvalidTree("cycle detected".into()));
            }
            seen[v] = true;
            order.push(v);
            for &ei in out[v].iter().rev() {
                stack.push(edges[ei].target.0);
            }
        }
        if order.len() != n {
            return Err(AmrError::InvalidTree("tree is not connected".into()));
        }
        let mut new_id = vec![0usize; n];
        for (pos, &old) in order.iter().enumerate() {
            new_id[old] = pos;
        }
        for &old in &order {
            for &ei in &out[old] {
                edge_order.push(ei);
            }
        }
        let mut slots: Vec<Option<AmrNode>> = nodes.into_iter().map(Some).collect();
        let new_nodes: Vec<AmrNode> = order.iter().map(|&o| slots[o].take().unwrap()).collect();
        // keep edges grouped by source in preorder, children in original order
        let mut new_edges: Vec<Edge> = edge_order
            .iter()
            .map(|&ei| {
                let e = &edges[ei];
                Edge {
                    source: NodeId(new_id[e.source.0]),
                    target: NodeId(new_id[e.target.0]),
                    role: e.role.clone(),
                    inverse: e.inverse,
                }
            })
            .collect();
        new_edges.sort_by_key(|e| e.target.0);
        Self::assemble(new_nodes, new_edges)
    }

    // Expects nodes in preorder and edges sorted by target.
    fn assemble(nodes: Vec<AmrNode>, edges: Vec<Edge>) -> Result<Self, AmrError> {
        let n = nodes.len();
        let mut children = vec![Vec::new(); n];
        let mut parent = vec![None; n];
        for (i, e) in edges.iter().enumerate() {
            children[e.source.0].push(i);
            parent[e.target.0] = Some(i);
        }
        let mut subtree_end = vec![0; n];
        for i in (0..n).rev() {
            subtree_end[i] = children[i]
                .iter()
                .map(|&ei| subtree_end[edges[ei].target.0])
                .max()
                .unwrap_or(i + 1);
        }
        let tree = AmrTree {
            nodes,
            edges,
            children,
            parent,
            subtree_end,
        };
        tree.check_labels()?;
        Ok(tree)
    }

    fn check_labels(&self) -> Result<(), AmrError> {
        let mut instances = HashSet::new();
        for node in &self.nodes {
            if let AmrNode::Instance { label, .. } = node {
                if !instances.insert(label.as_str()) {
                    return Err(AmrError::DuplicateInstanceLabel(label.clone()));
                }
            }
            if let AmrNode::Merge { width, .. } = node {
                if *width == 0 {
                    return Err(AmrError::InvalidTree("merge node with width 0".into()));
                }
            }
        }
        for node in &self.nodes {
            if let AmrNode::Coreference { label } = node {
                if !instances.contains(label.as_str()) {
                    return Err(AmrError::DanglingCoreference(label.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &AmrNode {
        &self.nodes[id.0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &AmrNode)> + '_ {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Outgoing edges of `id` in source order.
    pub fn children(&self, id: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.children[id.0].iter().map(move |&ei| &self.edges[ei])
    }

    pub fn parent_edge(&self, id: NodeId) -> Option<&Edge> {
        self.parent[id.0].map(|ei| &self.edges[ei])
    }

    pub fn depth(&self, id: NodeId) -> usize {
        let mut depth = 0;
        let mut cur = id;
        while let Some(e) = self.parent_edge(cur) {
            depth += 1;
            cur = e.source;
        }
        depth
    }

    /// Largest node depth; 0 for a single-node tree.
    pub fn max_depth(&self) -> usize {
        self.node_ids().map(|id| self.depth(id)).max().unwrap_or(0)
    }

    /// `id` followed by all of its descendants, in preorder.
    pub fn subtree(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        (id.0..self.subtree_end[id.0]).map(NodeId)
    }

    pub fn is_descendant(&self, node: NodeId, ancestor: NodeId) -> bool {
        node.0 > ancestor.0 && node.0 < self.subtree_end[ancestor.0]
    }

    pub fn instance_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_instance()).count()
    }

    pub fn constant_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_constant()).count()
    }

    pub fn coreference_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_coreference()).count()
    }

    pub fn merge_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_merge()).count()
    }

    /// Total width of all merge nodes.
    pub fn merge_width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                AmrNode::Merge { width, .. } => *width,
                _ => 0,
            })
            .sum()
    }

    pub fn is_negation_edge(&self, edge: &Edge) -> bool {
        edge.role == POLARITY_ROLE
            && matches!(
                self.node(edge.target),
                AmrNode::Constant { value, quoted: false, .. } if value == NEGATION_SYMBOL
            )
    }

    /// True when `id` has a `:polarity -` child.
    pub fn is_negated(&self, id: NodeId) -> bool {
        self.children(id).any(|e| self.is_negation_edge(e))
    }

    pub fn negation_count(&self) -> usize {
        self.edges.iter().filter(|e| self.is_negation_edge(e)).count()
    }

    /// Instance node defining `label`.
    pub fn instance_by_label(&self, label: &str) -> Option<NodeId> {
        self.nodes().find_map(|(id, n)| match n {
            AmrNode::Instance { label: l, .. } if l == label => Some(id),
            _ => None,
        })
    }

    /// Coreference nodes grouped by the label they refer to.
    pub fn coreferences(&self) -> HashMap<&str, Vec<NodeId>> {
        let mut map: HashMap<&str, Vec<NodeId>> = HashMap::new();
        for (id, n) in self.nodes() {
            if let AmrNode::Coreference { label } = n {
                map.entry(label.as_str()).or_default().push(id);
            }
        }
        map
    }

    pub fn path(&self, id: NodeId) -> NodePath {
        let mut steps = Vec::new();
        let mut cur = id;
        while let Some(e) = self.parent_edge(cur) {
            let role = e.surface_role();
            let ordinal = self
                .children(e.source)
                .take_while(|sib| sib.target != cur)
                .filter(|sib| sib.surface_role() == role)
                .count();
            steps.push((role, ordinal));
            cur = e.source;
        }
        steps.reverse();
        NodePath(steps)
    }

    pub fn resolve_path(&self, path: &NodePath) -> Option<NodeId> {
        let mut cur = self.root();
        for (role, ordinal) in &path.0 {
            cur = self
                .children(cur)
                .filter(|e| &e.surface_role() == role)
                .nth(*ordinal)?
                .target;
        }
        Some(cur)
    }

    /// True when frame numbers are stripped and inverse roles are flagged.
    pub fn is_normalized(&self) -> bool {
        let frames_ok = self.nodes.iter().all(|n| match n {
            AmrNode::Instance { predicate, .. } => strip_frame(predicate) == predicate,
            _ => true,
        });
        frames_ok && !self.edges.iter().any(Edge::has_unflagged_inverse)
    }

    pub(crate) fn nodes_raw(&self) -> &[AmrNode] {
        &self.nodes
    }

    pub(crate) fn with_nodes(&self, nodes: Vec<AmrNode>) -> AmrTree {
        debug_assert_eq!(nodes.len(), self.nodes.len());
        AmrTree {
            nodes,
            ..self.clone()
        }
    }

    pub(crate) fn with_edges(&self, edges: Vec<Edge>) -> AmrTree {
        debug_assert_eq!(edges.len(), self.edges.len());
        AmrTree {
            edges,
            ..self.clone()
        }
    }

    /// Single-line structural key: labels, predicates, roles, and merge
    /// widths. Embeddings are not part of the key.
    pub fn canonical_key(&self) -> String {
        let mut out = String::new();
        self.write_key(self.root(), &mut out);
        out
    }

    fn write_key(&self, id: NodeId, out: &mut String) {
        match self.node(id) {
            AmrNode::Instance { label, predicate, .. } => {
                out.push('(');
                out.push_str(label);
                out.push_str(" / ");
                out.push_str(predicate);
                for e in self.children(id) {
                    out.push(' ');
                    out.push_str(&e.surface_role());
                    out.push(' ');
                    self.write_key(e.target, out);
                }
                out.push(')');
            }
            AmrNode::Constant { value, quoted, .. } => {
                if *quoted {
                    out.push_str(&quote(value));
                } else {
                    out.push_str(value);
                }
            }
            AmrNode::Coreference { label } => out.push_str(label),
            AmrNode::Merge { var, width, .. } => {
                out.push_str(&format!("<{var}:{MERGE_MARKER}#{width}>"));
            }
        }
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

/// `concept-NN` becomes `concept`; anything else is returned unchanged.
pub fn strip_frame(predicate: &str) -> &str {
    match predicate.rsplit_once('-') {
        Some((stem, num))
            if !stem.is_empty() && !num.is_empty() && num.bytes().all(|b| b.is_ascii_digit()) =>
        {
            stem
        }
        _ => predicate,
    }
}

pub fn strip_frame_numbers(tree: &AmrTree) -> AmrTree {
    let nodes = tree
        .nodes_raw()
        .iter()
        .map(|n| match n {
            AmrNode::Instance {
                label,
                predicate,
                embedding,
            } => AmrNode::Instance {
                label: label.clone(),
                predicate: strip_frame(predicate).to_string(),
                embedding: embedding.clone(),
            },
            other => other.clone(),
        })
        .collect();
    tree.with_nodes(nodes)
}

/// Flags `:x-of` edges as inverse `:x` edges. Parent/child shape is kept;
/// only the logic orientation changes.
pub fn normalize_inverse_roles(tree: &AmrTree) -> AmrTree {
    let edges = tree
        .edges()
        .iter()
        .map(|e| {
            if e.has_unflagged_inverse() {
                Edge {
                    role: e.role[..e.role.len() - 3].to_string(),
                    inverse: true,
                    ..e.clone()
                }
            } else {
                e.clone()
            }
        })
        .collect();
    tree.with_edges(edges)
}

/// Frame stripping followed by inverse-role normalization.
pub fn normalize(tree: &AmrTree) -> AmrTree {
    normalize_inverse_roles(&strip_frame_numbers(tree))
}
