use crate::amr::{AmrNode, AmrTree, Edge, NodeId, POLARITY_ROLE};
use crate::similarity::{Symbol, MERGE_MARKER};

use super::{Clause, Formula, Implication, Literal, LogicError, Term, Verdict, VerdictKind, VerdictLexicon};

/// Logic variable for an AMR label: `b2` becomes `B2`.
pub fn variable_name(label: &str) -> String {
    label.to_uppercase()
}

/// Ground constant for an AMR label within one document. Labels are only
/// unique inside a document, so a non-empty document id is appended.
pub fn constant_name(label: &str, doc_id: &str) -> String {
    let label = label.to_lowercase();
    if doc_id.is_empty() {
        return label;
    }
    let suffix: String = doc_id
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    format!("{label}_{suffix}")
}

fn check_normalized(tree: &AmrTree) -> Result<(), LogicError> {
    if tree.is_normalized() {
        Ok(())
    } else {
        Err(LogicError::UnnormalizedTree)
    }
}

/// Instance or merge node a term position stands for, following coreferences.
fn referent(tree: &AmrTree, id: NodeId) -> NodeId {
    match tree.node(id) {
        AmrNode::Coreference { label } => tree.instance_by_label(label).unwrap_or(id),
        _ => id,
    }
}

fn concept(tree: &AmrTree, id: NodeId, arg: Term) -> Literal {
    let predicate = match tree.node(id) {
        AmrNode::Instance { predicate, embedding, .. } => Symbol::with_embedding(predicate, embedding.clone()),
        AmrNode::Merge { embedding, .. } => Symbol::with_embedding(MERGE_MARKER, Some(embedding.clone())),
        other => Symbol::new(other.label()),
    };
    Literal::new(predicate, vec![arg])
}

fn role_literal(edge: &Edge, first: Term, second: Term) -> Literal {
    Literal::new(Symbol::new(edge.role.clone()), vec![first, second])
}

/// Terms used when converting one tree: variables for rules and open
/// formulas, document-scoped constants for facts.
struct Naming<'a> {
    tree: &'a AmrTree,
    ground: Option<&'a str>,
}

impl Naming<'_> {
    fn term(&self, id: NodeId) -> Term {
        let id = referent(self.tree, id);
        let node = self.tree.node(id);
        match node {
            AmrNode::Constant { value, embedding, .. } => Term::Const(Symbol::with_embedding(value, embedding.clone())),
            _ => {
                let label = node.variable().unwrap_or(node.label());
                match self.ground {
                    None => Term::Var(variable_name(label)),
                    Some(doc) => Term::Const(Symbol::with_embedding(
                        constant_name(label, doc),
                        node.embedding().cloned(),
                    )),
                }
            }
        }
    }

    fn var(&self, id: NodeId) -> String {
        self.term(id).name().to_string()
    }
}

/// Existentially quantified conjunction for a normalized tree.
///
/// Each instance opens a scope holding its incoming role literal, its
/// concept literal, and its children. `:polarity -` negates the whole scope.
/// Instances that are referenced elsewhere are quantified outermost so every
/// use is in scope.
pub fn amr_to_formula(tree: &AmrTree) -> Result<Formula, LogicError> {
    check_normalized(tree)?;
    let naming = Naming { tree, ground: None };
    let refs = tree.coreferences();
    let hoisted: Vec<NodeId> = tree
        .node_ids()
        .filter(|&id| id != tree.root())
        .filter(|&id| match tree.node(id) {
            AmrNode::Instance { label, .. } => refs.contains_key(label.as_str()),
            _ => false,
        })
        .collect();

    let root_scope = scope(tree, &naming, &hoisted, tree.root(), None);
    if hoisted.is_empty() {
        return Ok(root_scope);
    }
    let mut parts = Vec::new();
    for &h in &hoisted {
        let local = local_conjunction(tree, &naming, &hoisted, h, None);
        if tree.is_negated(h) {
            parts.push(Formula::Not(Box::new(Formula::and(local))));
        } else {
            parts.extend(local);
        }
    }
    parts.push(root_scope);
    let mut f = Formula::and(parts);
    for &h in hoisted.iter().rev() {
        f = Formula::Exists(naming.var(h), Box::new(f));
    }
    Ok(f)
}

fn local_conjunction(
    tree: &AmrTree,
    naming: &Naming<'_>,
    hoisted: &[NodeId],
    id: NodeId,
    incoming: Option<Literal>,
) -> Vec<Formula> {
    let mut conj: Vec<Formula> = incoming.into_iter().map(Formula::Atom).collect();
    conj.push(Formula::Atom(concept(tree, id, naming.term(id))));
    for edge in tree.children(id) {
        let target = edge.target;
        let is_scope = matches!(tree.node(target), AmrNode::Instance { .. } | AmrNode::Merge { .. })
            && !hoisted.contains(&target);
        if edge.role == POLARITY_ROLE {
            if is_scope {
                conj.push(scope(tree, naming, hoisted, target, None));
            }
            continue;
        }
        let o = edge.orientation();
        let lit = role_literal(edge, naming.term(o.first), naming.term(o.second));
        if is_scope {
            conj.push(scope(tree, naming, hoisted, target, Some(lit)));
        } else {
            conj.push(Formula::Atom(lit));
        }
    }
    conj
}

fn scope(tree: &AmrTree, naming: &Naming<'_>, hoisted: &[NodeId], id: NodeId, incoming: Option<Literal>) -> Formula {
    let conj = local_conjunction(tree, naming, hoisted, id, incoming);
    let f = Formula::Exists(naming.var(id), Box::new(Formula::and(conj)));
    if tree.is_negated(id) {
        Formula::Not(Box::new(f))
    } else {
        f
    }
}

/// Literals of the subtree at `start` in depth-first order with quantifiers
/// dropped. A negated node contributes its concept literal negated.
fn flatten(tree: &AmrTree, naming: &Naming<'_>, start: NodeId) -> Result<Vec<Literal>, LogicError> {
    let mut out = Vec::new();
    walk(tree, naming, start, false, &mut out)?;
    let mut unique: Vec<Literal> = Vec::with_capacity(out.len());
    for l in out {
        if !unique.contains(&l) {
            unique.push(l);
        }
    }
    Ok(unique)
}

fn walk(
    tree: &AmrTree,
    naming: &Naming<'_>,
    id: NodeId,
    under_negation: bool,
    out: &mut Vec<Literal>,
) -> Result<(), LogicError> {
    let negated = tree.is_negated(id);
    if negated && under_negation {
        return Err(LogicError::NegationUnsupportedInFacts);
    }
    let c = concept(tree, id, naming.term(id));
    out.push(if negated { c.negated() } else { c });
    for edge in tree.children(id) {
        let target = edge.target;
        if edge.role != POLARITY_ROLE {
            let o = edge.orientation();
            out.push(role_literal(edge, naming.term(o.first), naming.term(o.second)));
        }
        if matches!(tree.node(target), AmrNode::Instance { .. } | AmrNode::Merge { .. }) {
            walk(tree, naming, target, under_negation || negated, out)?;
        }
    }
    Ok(())
}

/// Ground facts for a situation tree. Variables become constants named
/// after node labels with `doc_id` appended; each carries its node's
/// embedding.
pub fn sst_to_facts(tree: &AmrTree, doc_id: &str) -> Result<Vec<Literal>, LogicError> {
    check_normalized(tree)?;
    let naming = Naming {
        tree,
        ground: Some(doc_id),
    };
    flatten(tree, &naming, tree.root())
}

fn is_numbered_arg(role: &str) -> bool {
    role.strip_prefix(":ARG")
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

fn body_edge(tree: &AmrTree, root: NodeId) -> Option<&Edge> {
    let candidates: Vec<&Edge> = tree
        .children(root)
        .filter(|e| e.role != POLARITY_ROLE && !tree.node(e.target).is_constant())
        .collect();
    candidates
        .iter()
        .find(|e| !e.inverse && e.role == ":ARG1")
        .or_else(|| candidates.iter().find(|e| !e.inverse && is_numbered_arg(&e.role)))
        .or_else(|| candidates.first())
        .copied()
}

/// Reshapes a rule-of-thumb tree into `body -> verdict(body)`.
///
/// The root must be a verdict concept from the lexicon, or a modal whose
/// `:ARG1` is the action (read as GOOD). A `:polarity -` on the root negates
/// the verdict. The antecedent is the flattened action subtree; the verdict
/// node and its linking edge are dropped.
pub fn rot_to_implication(tree: &AmrTree, lexicon: &VerdictLexicon) -> Result<Implication, LogicError> {
    check_normalized(tree)?;
    let root = tree.root();
    let concept_name = match tree.node(root) {
        AmrNode::Instance { predicate, .. } => predicate.as_str(),
        other => other.label(),
    };
    let (mut verdict, edge) = if let Some(v) = lexicon.lookup(concept_name) {
        (v, body_edge(tree, root))
    } else if lexicon.is_modal(concept_name) {
        let edge = tree
            .children(root)
            .find(|e| !e.inverse && e.role == ":ARG1" && !tree.node(e.target).is_constant());
        (Verdict { kind: VerdictKind::Good, negated: false }, edge)
    } else {
        return Err(LogicError::VerdictUnmapped(concept_name.to_string()));
    };
    let edge = edge.ok_or(LogicError::MissingBody)?;
    if tree.is_negated(root) {
        verdict.negated = !verdict.negated;
    }
    let body = referent(tree, edge.target);
    if !matches!(tree.node(body), AmrNode::Instance { .. } | AmrNode::Merge { .. }) {
        return Err(LogicError::MissingBody);
    }
    let naming = Naming { tree, ground: None };
    let antecedent = flatten(tree, &naming, body)?;
    Ok(Implication {
        antecedent,
        consequent: verdict.literal(&naming.var(body)),
    })
}

/// `A1 & ... & An -> C` as the clause `!A1 | ... | !An | C`.
pub fn implication_clause(rule: &Implication) -> Clause {
    let mut lits: Vec<Literal> = rule.antecedent.iter().map(Literal::complement).collect();
    lits.push(rule.consequent.clone());
    Clause::new(lits)
}

/// One unit clause per fact.
pub fn to_clauses(facts: &[Literal]) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::with_capacity(facts.len());
    for f in facts {
        let c = Clause::unit(f.clone());
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}
