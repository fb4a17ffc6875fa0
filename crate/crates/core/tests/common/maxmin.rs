//! Random knowledge bases with embedded symbols, and an exhaustive search
//! for the best proof score.
//!
//! The oracle walks every linear input-resolution derivation from the
//! negated goal up to a depth limit with no pruning, using its own
//! unification and its own similarity arithmetic, and returns the highest
//! minimum step similarity over all refutations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use reasoner_core::logic::{Clause, Literal, Term};
use reasoner_core::similarity::{Embedding, Symbol};

pub struct RandomKb {
    pub kb: Vec<Clause>,
    pub goal: Literal,
    /// Raw vectors by symbol name, for the oracle's own similarity.
    pub vectors: BTreeMap<String, Vec<f64>>,
}

const PREDICATES: [(&str, usize); 5] = [("p", 1), ("q", 1), ("r", 2), ("s", 1), ("t", 2)];
const CONSTANTS: [&str; 3] = ["a", "b", "c"];
const VARIABLES: [&str; 3] = ["X", "Y", "Z"];
const DIM: usize = 4;

fn vector(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..DIM).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_kb(seed: u64) -> RandomKb {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = BTreeMap::new();
    for (name, _) in PREDICATES {
        vectors.insert(name.to_string(), vector(&mut rng));
    }
    for name in CONSTANTS {
        vectors.insert(name.to_string(), vector(&mut rng));
    }
    let symbol = |name: &str| Symbol::with_embedding(name, Some(Embedding::new(vectors[name].clone()).unwrap()));

    let literal = |rng: &mut ChaCha8Rng, ground: bool, positive: bool| {
        let (name, arity) = *PREDICATES.choose(rng).unwrap();
        let args = (0..arity)
            .map(|_| {
                if ground || rng.gen_bool(0.4) {
                    Term::Const(symbol(CONSTANTS.choose(rng).unwrap()))
                } else {
                    Term::var(*VARIABLES.choose(rng).unwrap())
                }
            })
            .collect();
        let l = Literal::new(symbol(name), args);
        if positive {
            l
        } else {
            l.negated()
        }
    };

    let n = rng.gen_range(3..=8);
    let kb = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Clause::new(vec![literal(&mut rng, true, true)])
            } else {
                // a rule: one or two body literals and a head
                let body = rng.gen_range(1..=2);
                let mut lits: Vec<Literal> = (0..body).map(|_| literal(&mut rng, false, false)).collect();
                lits.push(literal(&mut rng, false, true));
                Clause::new(lits)
            }
        })
        .collect();
    let goal = literal(&mut rng, false, true);
    RandomKb { kb, goal, vectors }
}

#[derive(Clone, Debug, PartialEq)]
enum A {
    V(String),
    C(String),
}

#[derive(Clone, Debug, PartialEq)]
struct L {
    pos: bool,
    pred: String,
    args: Vec<A>,
}

fn lower(c: &Clause) -> Vec<L> {
    c.literals
        .iter()
        .map(|l| L {
            pos: l.positive,
            pred: l.predicate.name.clone(),
            args: l
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => A::V(v.clone()),
                    Term::Const(s) => A::C(s.name.clone()),
                })
                .collect(),
        })
        .collect()
}

pub struct Oracle<'a> {
    vectors: &'a BTreeMap<String, Vec<f64>>,
    inputs: Vec<Vec<L>>,
    tau: f64,
    max_depth: usize,
    fresh: usize,
}

impl<'a> Oracle<'a> {
    fn sim(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        let (x, y) = (&self.vectors[a], &self.vectors[b]);
        let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        (dot / (nx * ny) + 1.0) / 2.0
    }

    fn rename(&mut self, c: &[L]) -> Vec<L> {
        self.fresh += 1;
        let n = self.fresh;
        c.iter()
            .map(|l| L {
                args: l
                    .args
                    .iter()
                    .map(|a| match a {
                        A::V(v) => A::V(format!("{v}#{n}")),
                        c => c.clone(),
                    })
                    .collect(),
                ..l.clone()
            })
            .collect()
    }

    fn unify(&self, x: &L, y: &L) -> Option<(BTreeMap<String, A>, f64)> {
        let mut score = self.sim(&x.pred, &y.pred);
        if score <= self.tau {
            return None;
        }
        let mut s: BTreeMap<String, A> = BTreeMap::new();
        fn walk(s: &BTreeMap<String, A>, a: &A) -> A {
            let mut cur = a.clone();
            while let A::V(v) = &cur {
                match s.get(v) {
                    Some(next) => cur = next.clone(),
                    None => break,
                }
            }
            cur
        }
        for (p, q) in x.args.iter().zip(&y.args) {
            match (walk(&s, p), walk(&s, q)) {
                (A::V(u), A::V(v)) if u == v => {}
                (A::V(u), t) | (t, A::V(u)) => {
                    s.insert(u, t);
                }
                (A::C(c), A::C(d)) => {
                    score = score.min(self.sim(&c, &d));
                    if score <= self.tau {
                        return None;
                    }
                }
            }
        }
        // fully resolve every binding
        let keys: Vec<String> = s.keys().cloned().collect();
        let resolved = keys.iter().map(|k| (k.clone(), walk(&s, &A::V(k.clone())))).collect();
        Some((resolved, score))
    }

    fn search(&mut self, clause: &[L], depth: usize, score: f64, best: &mut Option<f64>) {
        if depth == self.max_depth {
            return;
        }
        for k in 0..self.inputs.len() {
            let input = self.inputs[k].clone();
            let right = self.rename(&input);
            for (i, x) in clause.iter().enumerate() {
                for (j, y) in right.iter().enumerate() {
                    if x.pos == y.pos || x.args.len() != y.args.len() {
                        continue;
                    }
                    let Some((s, sim)) = self.unify(x, y) else { continue };
                    let apply = |l: &L| L {
                        args: l
                            .args
                            .iter()
                            .map(|a| match a {
                                A::V(v) => s.get(v).cloned().unwrap_or_else(|| a.clone()),
                                c => c.clone(),
                            })
                            .collect(),
                        ..l.clone()
                    };
                    let mut resolvent: Vec<L> = Vec::new();
                    let rest = clause
                        .iter()
                        .enumerate()
                        .filter(|&(m, _)| m != i)
                        .chain(right.iter().enumerate().filter(|&(m, _)| m != j))
                        .map(|(_, l)| apply(l));
                    for l in rest {
                        if !resolvent.contains(&l) {
                            resolvent.push(l);
                        }
                    }
                    let total = score.min(sim);
                    if resolvent.is_empty() {
                        if best.is_none_or(|b| total > b) {
                            *best = Some(total);
                        }
                    } else {
                        self.search(&resolvent, depth + 1, total, best);
                    }
                }
            }
        }
    }
}

/// Best proof score for `goal` over derivations of at most `max_depth` steps.
pub fn best_score(r: &RandomKb, tau: f64, max_depth: usize) -> Option<f64> {
    let negated = lower(&Clause::unit(r.goal.complement()));
    let mut inputs: Vec<Vec<L>> = r.kb.iter().map(lower).collect();
    inputs.push(negated.clone());
    let mut oracle = Oracle {
        vectors: &r.vectors,
        inputs,
        tau,
        max_depth,
        fresh: 0,
    };
    let mut best = None;
    oracle.search(&negated, 0, 1.0, &mut best);
    best
}
