//! First-order logic over AMR trees.
//!
//! Trees become existentially quantified conjunctions. A rule-of-thumb tree
//! is further reshaped into an implication whose consequent is a GOOD/BAD
//! verdict on the action, and a situation tree is grounded into facts.
//! Both end up as clauses for the prover.

mod convert;
mod lexicon;
mod notation;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::similarity::Symbol;

pub use convert::{
    amr_to_formula, constant_name, implication_clause, rot_to_implication, sst_to_facts, to_clauses,
    variable_name,
};
pub use lexicon::{VerdictEntry, VerdictLexicon};
pub use notation::{
    parse_clause, parse_clauses, parse_formula, parse_literal, Notation,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogicError {
    #[error("tree must have frame numbers stripped and inverse roles flagged")]
    UnnormalizedTree,
    #[error("root concept {0:?} is not a known verdict")]
    VerdictUnmapped(String),
    #[error("verdict node has no argument edge to an action")]
    MissingBody,
    #[error("negation nested under another negation cannot be flattened")]
    NegationUnsupportedInFacts,
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("invalid verdict lexicon: {0}")]
    Lexicon(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(Symbol),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(Symbol::new(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(v) => v,
            Term::Const(s) => &s.name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub positive: bool,
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(predicate: Symbol, args: Vec<Term>) -> Self {
        Self {
            positive: true,
            predicate,
            args,
        }
    }

    /// Builds an embedding-free literal, mostly for tests and goals.
    pub fn atom(predicate: &str, args: &[Term]) -> Self {
        Self::new(Symbol::new(predicate), args.to_vec())
    }

    pub fn negated(mut self) -> Self {
        self.positive = !self.positive;
        self
    }

    pub fn complement(&self) -> Self {
        self.clone().negated()
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Role predicates are named after AMR roles and start with `:`.
    pub fn is_role(&self) -> bool {
        self.predicate.name.starts_with(':')
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Atom(Literal),
    And(Vec<Formula>),
    Not(Box<Formula>),
    Exists(String, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// Conjunction that collapses to its only member when there is one.
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        }
    }

    /// Literals in left-to-right order, ignoring connectives.
    pub fn literals(&self) -> Vec<&Literal> {
        let mut out = Vec::new();
        self.collect_literals(&mut out);
        out
    }

    fn collect_literals<'a>(&'a self, out: &mut Vec<&'a Literal>) {
        match self {
            Formula::Atom(l) => out.push(l),
            Formula::And(fs) => fs.iter().for_each(|f| f.collect_literals(out)),
            Formula::Not(f) | Formula::Exists(_, f) => f.collect_literals(out),
            Formula::Implies(a, b) => {
                a.collect_literals(out);
                b.collect_literals(out);
            }
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Exists(..) => true,
            Formula::And(fs) => fs.iter().any(Formula::has_quantifier),
            Formula::Not(f) => f.has_quantifier(),
            Formula::Implies(a, b) => a.has_quantifier() || b.has_quantifier(),
        }
    }
}

/// A rule: conjunction of antecedent literals implies the consequent.
#[derive(Clone, Debug, PartialEq)]
pub struct Implication {
    pub antecedent: Vec<Literal>,
    pub consequent: Literal,
}

impl Implication {
    pub fn to_formula(&self) -> Formula {
        Formula::Implies(
            Box::new(Formula::and(self.antecedent.iter().cloned().map(Formula::Atom).collect())),
            Box::new(Formula::Atom(self.consequent.clone())),
        )
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.antecedent
            .iter()
            .chain(std::iter::once(&self.consequent))
            .flat_map(Literal::variables)
            .collect()
    }
}

/// A disjunction of literals with implicitly universal variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    /// Drops repeated literals, keeping first occurrences in order.
    pub fn new(literals: Vec<Literal>) -> Self {
        let mut out: Vec<Literal> = Vec::with_capacity(literals.len());
        for l in literals {
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Self { literals: out }
    }

    pub fn unit(literal: Literal) -> Self {
        Self {
            literals: vec![literal],
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.literals.iter().flat_map(Literal::variables).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VerdictKind {
    #[serde(rename = "GOOD")]
    Good,
    #[serde(rename = "BAD")]
    Bad,
}

impl VerdictKind {
    pub fn predicate(self) -> &'static str {
        match self {
            VerdictKind::Good => "GOOD",
            VerdictKind::Bad => "BAD",
        }
    }
}

/// One of GOOD, !GOOD, BAD, !BAD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub negated: bool,
}

impl Verdict {
    pub const ALL: [Verdict; 4] = [
        Verdict { kind: VerdictKind::Good, negated: false },
        Verdict { kind: VerdictKind::Good, negated: true },
        Verdict { kind: VerdictKind::Bad, negated: false },
        Verdict { kind: VerdictKind::Bad, negated: true },
    ];

    /// The verdict literal on a variable.
    pub fn literal(self, var: &str) -> Literal {
        let l = Literal::atom(self.kind.predicate(), &[Term::var(var)]);
        if self.negated {
            l.negated()
        } else {
            l
        }
    }

    /// Reads the verdict back off a consequent literal.
    pub fn of_literal(l: &Literal) -> Option<Verdict> {
        let kind = match l.predicate.name.as_str() {
            "GOOD" => VerdictKind::Good,
            "BAD" => VerdictKind::Bad,
            _ => return None,
        };
        (l.arity() == 1).then_some(Verdict {
            kind,
            negated: !l.positive,
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        f.write_str(self.kind.predicate())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Notation::plain().term(self))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Notation::plain().literal(self))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Notation::plain().clause(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Notation::plain().formula(self))
    }
}

impl fmt::Display for Implication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Notation::plain().formula(&self.to_formula()))
    }
}
