use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::logic::{Clause, Literal, Term};
use crate::similarity::SimilarityFn;

use super::unify::{combine, rename_clause, resolve, unify};
use super::{ClauseSource, Proof, ProofStep, ProverConfig, ProverError, Substitution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofStatus {
    Proved,
    /// The whole search space above the threshold was explored.
    NoProof,
    /// A depth, width, or expansion cap cut the search short.
    ResourceCapExceeded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofOutcome {
    pub status: ProofStatus,
    pub proof: Option<Proof>,
    pub expansions: usize,
}

/// Structural key of a clause up to variable renaming. Literals are sorted
/// with variables blanked, then variables are numbered by first occurrence.
/// Embedding fingerprints are included.
pub fn clause_key(c: &Clause) -> String {
    fn lit_key(l: &Literal, vars: Option<&mut Vec<String>>) -> String {
        let mut out = String::new();
        out.push(if l.positive { '+' } else { '-' });
        out.push_str(&l.predicate.name);
        if let Some(e) = &l.predicate.embedding {
            let _ = write!(out, "#{:x}", e.fingerprint());
        }
        out.push('(');
        let mut vars = vars;
        for t in &l.args {
            match t {
                Term::Var(v) => match vars.as_deref_mut() {
                    Some(seen) => {
                        let idx = seen.iter().position(|s| s == v).unwrap_or_else(|| {
                            seen.push(v.clone());
                            seen.len() - 1
                        });
                        let _ = write!(out, "?{idx}");
                    }
                    None => out.push('?'),
                },
                Term::Const(s) => {
                    out.push_str(&format!("{:?}", s.name));
                    if let Some(e) = &s.embedding {
                        let _ = write!(out, "#{:x}", e.fingerprint());
                    }
                }
            }
            out.push(',');
        }
        out.push(')');
        out
    }
    let mut order: Vec<(String, &Literal)> = c.literals.iter().map(|l| (lit_key(l, None), l)).collect();
    order.sort_by(|a, b| a.0.cmp(&b.0));
    let mut vars = Vec::new();
    let parts: Vec<String> = order.iter().map(|(_, l)| lit_key(l, Some(&mut vars))).collect();
    parts.join("|")
}

struct State {
    clause: Clause,
    similarity: f64,
    depth: usize,
    parent: Option<usize>,
    step: Option<ProofStep>,
}

#[derive(PartialEq)]
struct Entry {
    similarity: f64,
    depth: usize,
    seq: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // max-heap: higher similarity, then fewer steps, then earlier insertion
    fn cmp(&self, other: &Self) -> Ordering {
        self.similarity
            .total_cmp(&other.similarity)
            .then_with(|| other.depth.cmp(&self.depth))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Refutation search for `goal`.
///
/// Starts from the negated goal and repeatedly resolves the current clause
/// with an input clause (a knowledge-base clause or the negated goal),
/// renamed apart each time. States are expanded best-first by the minimum
/// similarity so far, so the first empty clause reached has the highest
/// score of any proof within the caps. A state is skipped when a variant of
/// its clause was already reached with at least its score in no more steps.
pub fn prove(
    kb: &[Clause],
    goal: &Literal,
    config: &ProverConfig,
    sim: &dyn SimilarityFn,
) -> Result<ProofOutcome, ProverError> {
    config.validate()?;
    let negated_goal = Clause::unit(goal.complement());
    let inputs: Vec<(ClauseSource, &Clause)> = kb
        .iter()
        .enumerate()
        .map(|(i, c)| (ClauseSource::Kb(i), c))
        .chain(std::iter::once((ClauseSource::Goal, &negated_goal)))
        .collect();

    let mut states = vec![State {
        clause: negated_goal.clone(),
        similarity: 1.0,
        depth: 0,
        parent: None,
        step: None,
    }];
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        similarity: 1.0,
        depth: 0,
        seq: 0,
    });
    let mut seen: HashMap<String, Vec<(f64, usize)>> = HashMap::new();
    seen.insert(clause_key(&negated_goal), vec![(1.0, 0)]);
    let mut capped = false;
    let mut expansions = 0usize;
    let mut renames = 0usize;

    while let Some(entry) = heap.pop() {
        let idx = entry.seq;
        if states[idx].clause.is_empty() {
            return Ok(ProofOutcome {
                status: ProofStatus::Proved,
                proof: Some(build_proof(goal, &states, idx)?),
                expansions,
            });
        }
        if expansions >= config.max_expansions {
            capped = true;
            break;
        }
        expansions += 1;
        if states[idx].depth >= config.max_proof_depth {
            capped = true;
            continue;
        }
        for &(source, input) in &inputs {
            renames += 1;
            let right = rename_clause(input, renames);
            let center = states[idx].clause.clone();
            for r in resolve(&center, &right, config, sim)? {
                if r.resolvent.len() > config.max_resolvent_width {
                    capped = true;
                    continue;
                }
                let similarity = states[idx].similarity.min(r.similarity);
                let depth = states[idx].depth + 1;
                let key = clause_key(&r.resolvent);
                let records = seen.entry(key).or_default();
                if records.iter().any(|&(s, d)| s >= similarity && d <= depth) {
                    continue;
                }
                records.retain(|&(s, d)| !(similarity >= s && depth <= d));
                records.push((similarity, depth));
                let step = ProofStep {
                    left: center.clone(),
                    right_source: source,
                    left_literal: center.literals[r.left].clone(),
                    right_literal: right.literals[r.right].clone(),
                    right: right.clone(),
                    similarity: r.similarity,
                    substitution: r.substitution,
                    resolvent: r.resolvent.clone(),
                };
                let seq = states.len();
                states.push(State {
                    clause: r.resolvent,
                    similarity,
                    depth,
                    parent: Some(idx),
                    step: Some(step),
                });
                heap.push(Entry { similarity, depth, seq });
            }
        }
    }
    Ok(ProofOutcome {
        status: if capped {
            ProofStatus::ResourceCapExceeded
        } else {
            ProofStatus::NoProof
        },
        proof: None,
        expansions,
    })
}

fn build_proof(goal: &Literal, states: &[State], end: usize) -> Result<Proof, ProverError> {
    let mut steps = Vec::new();
    let mut cur = Some(end);
    while let Some(i) = cur {
        if let Some(step) = &states[i].step {
            steps.push(step.clone());
        }
        cur = states[i].parent;
    }
    steps.reverse();
    let similarity = steps.iter().map(|s| s.similarity).fold(1.0, f64::min);
    let mut all = Substitution::new();
    for s in &steps {
        all.extend(&s.substitution);
    }
    let final_substitution = all.normalized()?;
    let answer: BTreeMap<String, Term> = goal
        .variables()
        .map(|v| (v.to_string(), final_substitution.apply_term(&Term::var(v))))
        .collect();
    Ok(Proof {
        goal: goal.clone(),
        steps,
        similarity,
        final_substitution,
        answer,
    })
}

fn renaming_key(c: &Clause) -> Clause {
    let mut names: Vec<String> = Vec::new();
    Clause {
        literals: c
            .literals
            .iter()
            .map(|l| Literal {
                positive: l.positive,
                predicate: l.predicate.clone(),
                args: l
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => {
                            let i = names.iter().position(|n| n == v).unwrap_or_else(|| {
                                names.push(v.clone());
                                names.len() - 1
                            });
                            Term::Var(format!("V{i}"))
                        }
                        other => other.clone(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Re-derives every step of `proof` and checks it against the inputs.
///
/// Each right parent must be a renaming of its recorded input, each left
/// parent the previous resolvent (the negated goal first), each unification
/// must reproduce the recorded substitution and score above the threshold,
/// and each resolvent must be exactly the combination of its parents. The
/// proof score must be the minimum step score, the last resolvent must be
/// empty, and the final substitution must agree with every step.
pub fn check_proof(
    proof: &Proof,
    kb: &[Clause],
    config: &ProverConfig,
    sim: &dyn SimilarityFn,
) -> Result<(), String> {
    let fail = |i: usize, why: &str| Err(format!("step {}: {why}", i + 1));
    if proof.steps.is_empty() {
        return Err("proof has no steps".into());
    }
    let negated_goal = Clause::unit(proof.goal.complement());
    for (i, s) in proof.steps.iter().enumerate() {
        let expected_left = if i == 0 {
            &negated_goal
        } else {
            &proof.steps[i - 1].resolvent
        };
        if &s.left != expected_left {
            return fail(i, "left parent is not the previous resolvent");
        }
        let input = match s.right_source {
            ClauseSource::Kb(k) => match kb.get(k) {
                Some(c) => c,
                None => return fail(i, "right parent index is outside the knowledge base"),
            },
            ClauseSource::Goal => &negated_goal,
        };
        if renaming_key(input) != renaming_key(&s.right) {
            return fail(i, "right parent is not a renaming of its input clause");
        }
        if s.left.variables().iter().any(|v| s.right.variables().contains(v)) {
            return fail(i, "parents share variables");
        }
        let Some(li) = s.left.literals.iter().position(|l| l == &s.left_literal) else {
            return fail(i, "resolved literal missing from left parent");
        };
        let Some(ri) = s.right.literals.iter().position(|l| l == &s.right_literal) else {
            return fail(i, "resolved literal missing from right parent");
        };
        if s.left_literal.positive == s.right_literal.positive {
            return fail(i, "resolved literals are not complementary");
        }
        let u = match unify(&s.left_literal, &s.right_literal, &Substitution::new(), config, sim) {
            Ok(Some(u)) => u,
            Ok(None) => return fail(i, "resolved literals do not unify above the threshold"),
            Err(e) => return fail(i, &e.to_string()),
        };
        if u.substitution != s.substitution {
            return fail(i, "recorded substitution differs from the unifier");
        }
        if (u.similarity - s.similarity).abs() > 1e-12 {
            return fail(i, "recorded similarity differs from the unifier");
        }
        if combine(&s.left, li, &s.right, ri, &s.substitution) != s.resolvent {
            return fail(i, "resolvent is not the combination of its parents");
        }
        for (v, t) in s.substitution.iter() {
            let lhs = proof.final_substitution.apply_term(&Term::Var(v.clone()));
            let rhs = proof.final_substitution.apply_term(t);
            if lhs != rhs {
                return fail(i, "final substitution disagrees with this step");
            }
        }
    }
    if !proof.steps.last().unwrap().resolvent.is_empty() {
        return Err("last resolvent is not empty".into());
    }
    let min = proof.steps.iter().map(|s| s.similarity).fold(1.0, f64::min);
    if min != proof.similarity {
        return Err(format!("proof similarity {} is not the step minimum {min}", proof.similarity));
    }
    Ok(())
}
