//! Resolution theorem proving with similarity-gated unification.
//!
//! Unification compares predicates and ground constants with a similarity
//! function instead of string equality and succeeds when the minimum score
//! stays above a threshold. A proof scores the minimum over its steps; the
//! search returns a proof with the highest score within its caps.

mod search;
mod unify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Clause, Literal, Notation, Term};
use crate::similarity::SimilarityError;

pub use search::{check_proof, clause_key, prove, ProofOutcome, ProofStatus};
pub use unify::{rename_clause, resolve, unify, Resolution, UnifyResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProverConfig {
    /// Unification succeeds only when the similarity is strictly above this.
    pub similarity_threshold: f64,
    /// Maximum number of resolution steps in a proof.
    pub max_proof_depth: usize,
    /// Resolvents with more literals are discarded.
    pub max_resolvent_width: usize,
    /// Search states expanded before giving up.
    pub max_expansions: usize,
}

impl Default for ProverConfig {
    fn default() -> Self {
        Self {
            similarity_threshold: 0.925,
            max_proof_depth: 12,
            max_resolvent_width: 20,
            max_expansions: 200_000,
        }
    }
}

impl ProverConfig {
    pub fn with_threshold(threshold: f64) -> Self {
        Self {
            similarity_threshold: threshold,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ProverError> {
        if !(0.0..=1.0).contains(&self.similarity_threshold) {
            return Err(ProverError::InvalidConfig(format!(
                "similarity threshold {} is outside [0, 1]",
                self.similarity_threshold
            )));
        }
        if self.max_proof_depth == 0 || self.max_resolvent_width == 0 || self.max_expansions == 0 {
            return Err(ProverError::InvalidConfig("caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProverError {
    #[error("cannot unify {left} with {right}: arity differs")]
    ArityMismatch { left: String, right: String },
    #[error("substitution binds {0} to itself through a chain")]
    CyclicSubstitution(String),
    #[error("invalid prover configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Variable bindings. Kept sorted so output is stable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<String, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.0.iter()
    }

    pub fn bind(&mut self, var: impl Into<String>, term: Term) {
        self.0.insert(var.into(), term);
    }

    /// Follows variable bindings until an unbound variable or a constant.
    pub fn walk<'a>(&'a self, mut term: &'a Term) -> &'a Term {
        let mut hops = 0;
        while let Term::Var(v) = term {
            match self.0.get(v) {
                Some(next) if next != term && hops <= self.0.len() => {
                    term = next;
                    hops += 1;
                }
                _ => break,
            }
        }
        term
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        self.walk(t).clone()
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal {
            positive: l.positive,
            predicate: l.predicate.clone(),
            args: l.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause::new(c.literals.iter().map(|l| self.apply_literal(l)).collect())
    }

    /// Resolves chains so no bound variable appears in the range.
    pub fn normalized(&self) -> Result<Substitution, ProverError> {
        let mut out = BTreeMap::new();
        for (v, t) in &self.0 {
            let mut seen = vec![v.as_str()];
            let mut cur = t;
            while let Term::Var(w) = cur {
                if seen.contains(&w.as_str()) {
                    if w == v {
                        return Err(ProverError::CyclicSubstitution(v.clone()));
                    }
                    break;
                }
                match self.0.get(w) {
                    Some(next) => {
                        seen.push(w);
                        cur = next;
                    }
                    None => break,
                }
            }
            if cur != &Term::Var(v.clone()) {
                out.insert(v.clone(), cur.clone());
            }
        }
        Ok(Substitution(out))
    }

    /// Merges bindings from `other`; existing bindings win.
    pub fn extend(&mut self, other: &Substitution) {
        for (v, t) in &other.0 {
            self.0.entry(v.clone()).or_insert_with(|| t.clone());
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}

/// Where the right-hand parent of a step came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseSource {
    /// Index into the knowledge base.
    Kb(usize),
    /// The negated goal.
    Goal,
}

impl fmt::Display for ClauseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseSource::Kb(i) => write!(f, "kb[{i}]"),
            ClauseSource::Goal => f.write_str("goal"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofStep {
    /// Clause derived so far (the negated goal on the first step).
    pub left: Clause,
    /// Input clause, renamed apart.
    pub right: Clause,
    pub right_source: ClauseSource,
    pub left_literal: Literal,
    pub right_literal: Literal,
    pub similarity: f64,
    pub substitution: Substitution,
    pub resolvent: Clause,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Proof {
    pub goal: Literal,
    pub steps: Vec<ProofStep>,
    /// Minimum over step similarities.
    pub similarity: f64,
    pub final_substitution: Substitution,
    /// Terms the goal's own variables ended up bound to.
    pub answer: BTreeMap<String, Term>,
}

impl Proof {
    /// Step table with one row per resolution.
    pub fn table(&self) -> String {
        let n = Notation::plain();
        let mut out = format!("goal: {}  similarity: {:.6}\n", n.literal(&self.goal), self.similarity);
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{:>3}. [{}] {}\n     with {}: {}\n     unify {} ~ {}  sim {:.6}  {}\n     => {}\n",
                i + 1,
                if i == 0 { "negated goal".to_string() } else { format!("step {i}") },
                n.clause(&s.left),
                s.right_source,
                n.clause(&s.right),
                n.literal(&s.left_literal),
                n.literal(&s.right_literal),
                s.similarity,
                s.substitution,
                n.clause(&s.resolvent),
            ));
        }
        if !self.answer.is_empty() {
            let parts: Vec<String> = self.answer.iter().map(|(v, t)| format!("{v} = {t}")).collect();
            out.push_str(&format!("answer: {}\n", parts.join(", ")));
        }
        out
    }
}
