//! Exhaustive merge enumeration straight from the set definition.
//!
//! A state is the set of surviving nodes of the original tree, some of them
//! replaced by merge nodes. Merging `t` removes the set `J` of `t` and its
//! surviving descendants and puts a merge node in `t`'s place, keeping the
//! incoming edge. Every rule is checked on the explicit node sets before and
//! after the merge. The search applies every valid merge to every reachable
//! state with no pruning beyond deduplication.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reasoner_core::amr::{AlignedAmrDocument, AmrNode, AmrTree};
use reasoner_core::merge::{enumerate_merge_trees, Bound, MergeConfig};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Instance { label: String, embedded: bool },
    Constant { value: String, embedded: bool },
    Coreference { label: String },
    Merge { width: usize },
}

#[derive(Clone, Debug)]
pub struct OTree {
    pub kinds: Vec<Kind>,
    pub parent: Vec<Option<usize>>,
    pub role: Vec<String>,
}

impl OTree {
    pub fn from_amr(tree: &AmrTree) -> Self {
        let ids: Vec<_> = tree.node_ids().collect();
        let index = |id| ids.iter().position(|&x| x == id).unwrap();
        let mut kinds = Vec::new();
        let mut parent = Vec::new();
        let mut role = Vec::new();
        for &id in &ids {
            kinds.push(match tree.node(id) {
                AmrNode::Instance { label, embedding, .. } => Kind::Instance {
                    label: label.clone(),
                    embedded: embedding.is_some(),
                },
                AmrNode::Constant { value, embedding, .. } => Kind::Constant {
                    value: value.clone(),
                    embedded: embedding.is_some(),
                },
                AmrNode::Coreference { label } => Kind::Coreference { label: label.clone() },
                AmrNode::Merge { .. } => panic!("oracle input must be merge-free"),
            });
            let edge = tree.parent_edge(id);
            parent.push(edge.map(|e| index(e.source)));
            role.push(edge.map(|e| e.role.clone()).unwrap_or_default());
        }
        OTree { kinds, parent, role }
    }

    fn depth(&self, mut n: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[n] {
            n = p;
            d += 1;
        }
        d
    }

    fn is_under(&self, mut n: usize, ancestor: usize) -> bool {
        loop {
            if n == ancestor {
                return true;
            }
            match self.parent[n] {
                Some(p) => n = p,
                None => return false,
            }
        }
    }
}

/// Surviving node ids and their (possibly merged) kinds.
pub type State = BTreeMap<usize, Kind>;

fn negations(t: &OTree, s: &State) -> usize {
    s.iter()
        .filter(|(&n, k)| t.role[n] == ":polarity" && matches!(k, Kind::Constant { value, .. } if value == "-"))
        .count()
}

fn survives_as_instance(s: &State, label: &str) -> bool {
    s.values().any(|k| matches!(k, Kind::Instance { label: l, .. } if l == label))
}

fn coref_count(s: &State, label: &str) -> usize {
    s.values().filter(|k| matches!(k, Kind::Coreference { label: l } if l == label)).count()
}

fn width_ok(c: &MergeConfig, w: usize) -> bool {
    match c.width_bound {
        Bound::Strict => w < c.max_merge_width,
        Bound::Inclusive => w <= c.max_merge_width,
    }
}

fn depth_ok(c: &MergeConfig, d: usize) -> bool {
    match c.depth_bound {
        Bound::Strict => d > c.min_merge_depth,
        Bound::Inclusive => d >= c.min_merge_depth,
    }
}

/// The state after merging `target`, or `None` if the merge breaks a rule.
pub fn merge(t: &OTree, s: &State, target: usize, c: &MergeConfig) -> Option<State> {
    let Some(Kind::Instance { .. }) = s.get(&target) else {
        return None;
    };
    let j: BTreeSet<usize> = s.keys().copied().filter(|&n| t.is_under(n, target)).collect();
    let width: usize = j
        .iter()
        .map(|n| match &s[n] {
            Kind::Merge { width } => *width,
            Kind::Instance { embedded: true, .. } | Kind::Constant { embedded: true, .. } => 1,
            _ => 0,
        })
        .sum();
    let mut after: State = s.iter().filter(|(n, _)| !j.contains(n)).map(|(n, k)| (*n, k.clone())).collect();
    after.insert(target, Kind::Merge { width });

    // no negation may disappear
    if negations(t, s) != negations(t, &after) {
        return None;
    }
    // an instance and its coreferences survive or go together
    for k in s.values() {
        let Kind::Instance { label, .. } = k else { continue };
        let refs = coref_count(s, label);
        if refs == 0 {
            continue;
        }
        let inst = survives_as_instance(&after, label);
        let left = coref_count(&after, label);
        if !((inst && left == refs) || (!inst && left == 0)) {
            return None;
        }
    }
    // something embedded to merge, within the width and depth bounds
    if width == 0 || !width_ok(c, width) || !depth_ok(c, t.depth(target)) {
        return None;
    }
    Some(after)
}

pub struct Enumeration {
    /// Every reachable state, keyed by the set of merged node ids.
    pub states: BTreeMap<BTreeSet<usize>, State>,
}

impl Enumeration {
    pub fn node_counts(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.states.values().map(|s| s.len()).collect();
        v.sort();
        v
    }

    /// Sets of collapsed instance labels, one per reachable tree.
    pub fn target_labels(&self, t: &OTree) -> BTreeSet<BTreeSet<String>> {
        self.states
            .keys()
            .map(|ids| {
                ids.iter()
                    .map(|&n| match &t.kinds[n] {
                        Kind::Instance { label, .. } => label.clone(),
                        other => panic!("merged non-instance {other:?}"),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn collapsability(&self) -> Option<f64> {
        let counts = self.node_counts();
        let (min, max) = (counts[0] as f64, *counts.last().unwrap() as f64);
        (max > 1.0).then(|| 1.0 - (min - 1.0) / (max - 1.0))
    }
}

pub fn enumerate(t: &OTree, c: &MergeConfig) -> Enumeration {
    let start: State = t.kinds.iter().cloned().enumerate().collect();
    let mut states = BTreeMap::new();
    let key = |s: &State| -> BTreeSet<usize> {
        s.iter().filter(|(_, k)| matches!(k, Kind::Merge { .. })).map(|(n, _)| *n).collect()
    };
    states.insert(BTreeSet::new(), start.clone());
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for &target in s.keys() {
            if let Some(next) = merge(t, &s, target, c) {
                let k = key(&next);
                if let std::collections::btree_map::Entry::Vacant(slot) = states.entry(k) {
                    slot.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
    }
    Enumeration { states }
}

/// A random merge-free tree of at most `max_nodes` nodes, as a document
/// whose embedded nodes each align to one token.
pub fn random_document(seed: u64, max_nodes: usize) -> AlignedAmrDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_nodes);
    // (parent, role, text) per node; text is "label / pred", a constant, or a label
    let mut nodes: Vec<(Option<usize>, String, String, bool)> = vec![(None, String::new(), "n0 / c0".into(), true)];
    let mut instances = vec![0usize];
    let mut embedded = vec![rng.gen_bool(0.85)];
    for i in 1..n {
        let parent = *instances.choose(&mut rng).unwrap();
        let negated = nodes.iter().any(|(p, r, _, _)| *p == Some(parent) && r == ":polarity");
        let roll: f64 = rng.gen();
        let role = [":ARG0", ":ARG1", ":ARG2", ":mod"].choose(&mut rng).unwrap().to_string();
        let others: Vec<usize> = instances.iter().copied().filter(|&x| x != parent).collect();
        if roll < 0.15 && !negated {
            nodes.push((Some(parent), ":polarity".into(), "-".into(), false));
            embedded.push(false);
        } else if roll < 0.3 {
            nodes.push((Some(parent), role, format!("\"k{i}\""), false));
            embedded.push(rng.gen_bool(0.6));
        } else if roll < 0.45 && !others.is_empty() {
            let target = *others.choose(&mut rng).unwrap();
            let label = nodes[target].2.split(" / ").next().unwrap().to_string();
            nodes.push((Some(parent), role, label, false));
            embedded.push(false);
        } else {
            nodes.push((Some(parent), role, format!("n{i} / c{i}"), true));
            instances.push(i);
            embedded.push(rng.gen_bool(0.85));
        }
    }

    // render Penman and compute each node's path the way paths are written
    fn render(nodes: &[(Option<usize>, String, String, bool)], i: usize, out: &mut String) {
        let (_, _, text, is_instance) = &nodes[i];
        if !is_instance {
            out.push_str(text);
            return;
        }
        out.push('(');
        out.push_str(text);
        for (k, (p, role, _, _)) in nodes.iter().enumerate() {
            if *p == Some(i) {
                out.push(' ');
                out.push_str(role);
                out.push(' ');
                render(nodes, k, out);
            }
        }
        out.push(')');
    }
    let mut penman = String::new();
    render(&nodes, 0, &mut penman);

    let mut paths = vec![String::new(); nodes.len()];
    for i in 1..nodes.len() {
        let p = nodes[i].0.unwrap();
        let ordinal = (1..i).filter(|&k| nodes[k].0 == Some(p) && nodes[k].1 == nodes[i].1).count();
        let step = format!("{}.{ordinal}", nodes[i].1);
        paths[i] = if paths[p].is_empty() { step } else { format!("{}/{step}", paths[p]) };
    }

    let mut tokens = Vec::new();
    let mut token_embeddings = Vec::new();
    let mut node_alignments = BTreeMap::new();
    for i in 0..nodes.len() {
        if embedded[i] {
            node_alignments.insert(paths[i].clone(), vec![tokens.len()]);
            tokens.push(format!("w{i}"));
            token_embeddings.push((0..4).map(|_| rng.gen_range(-1.0f32..1.0)).collect());
        }
    }
    AlignedAmrDocument {
        id: format!("random-{seed}"),
        text: tokens.join(" "),
        penman,
        tokens,
        node_alignments,
        token_embeddings,
    }
}

pub fn random_config(seed: u64) -> MergeConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let bound = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Bound::Strict } else { Bound::Inclusive };
    MergeConfig {
        max_merge_width: rng.gen_range(1..=7),
        width_bound: bound(&mut rng),
        min_merge_depth: rng.gen_range(0..=3),
        depth_bound: bound(&mut rng),
        max_variants: 10_000,
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

fn coref_counts(t: &AmrTree) -> HashMap<String, usize> {
    t.coreferences().into_iter().map(|(l, r)| (l.to_string(), r.len())).collect()
}

/// Checks every variant the library emits against the merge rules, and the
/// whole set against [`enumerate`].
pub fn check_variants(tree: &AmrTree, config: &MergeConfig) -> Result<(), String> {
    let set = enumerate_merge_trees(tree, config).map_err(|e| e.to_string())?;
    let negations = tree.negation_count();
    let corefs = coref_counts(tree);
    for v in &set.variants {
        let t = &v.tree;
        ensure!(t.negation_count() == negations, "negation lost in {:?}", v.targets);
        for (label, refs) in coref_counts(t) {
            let def = t.instance_by_label(&label);
            ensure!(def.is_some_and(|d| t.node(d).is_instance()), "{label} lost its instance");
            ensure!(refs == corefs[&label], "{label} lost some references");
        }
        for label in corefs.keys() {
            if t.instance_by_label(label).is_some_and(|d| t.node(d).is_instance()) {
                ensure!(t.coreferences().contains_key(label.as_str()), "{label} lost its references");
            }
        }
        ensure!(t.merge_count() >= 1, "variant without a merge");
        for (id, node) in t.nodes() {
            if let AmrNode::Merge { width, .. } = node {
                ensure!(config.width_allowed(*width), "width {width}");
                ensure!(config.depth_allowed(t.depth(id)), "depth {}", t.depth(id));
            }
        }
    }

    let o = OTree::from_amr(tree);
    let oracle = enumerate(&o, config);
    let mut counts: Vec<usize> = set.trees().map(AmrTree::len).collect();
    counts.sort();
    ensure!(counts == oracle.node_counts(), "node counts {counts:?} vs {:?}", oracle.node_counts());
    let ours: BTreeSet<BTreeSet<String>> = std::iter::once(BTreeSet::new())
        .chain(set.variants.iter().map(|v| v.targets.iter().cloned().collect()))
        .collect();
    ensure!(ours == oracle.target_labels(&o), "targets {ours:?} vs {:?}", oracle.target_labels(&o));
    if tree.len() > 1 {
        let got = set.collapsability().map_err(|e| e.to_string())?;
        let want = oracle.collapsability().unwrap();
        ensure!((got - want).abs() < 1e-9, "collapsability {got} vs {want}");
    }
    Ok(())
}
