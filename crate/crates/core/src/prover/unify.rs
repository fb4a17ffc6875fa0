use crate::logic::{Clause, Literal, Term};
use crate::similarity::SimilarityFn;

use super::{ProverConfig, ProverError, Substitution};

#[derive(Clone, Debug, PartialEq)]
pub struct UnifyResult {
    pub substitution: Substitution,
    pub similarity: f64,
}

/// Unifies the atoms of `a` and `b` (polarity is ignored) on top of `subst`.
///
/// The score starts at the predicate similarity and takes the minimum with
/// every constant/constant comparison. Binding a variable costs nothing.
/// Returns `None` unless the final score is above the threshold.
pub fn unify(
    a: &Literal,
    b: &Literal,
    subst: &Substitution,
    config: &ProverConfig,
    sim: &dyn SimilarityFn,
) -> Result<Option<UnifyResult>, ProverError> {
    if a.arity() != b.arity() {
        return Err(ProverError::ArityMismatch {
            left: a.to_string(),
            right: b.to_string(),
        });
    }
    let tau = config.similarity_threshold;
    let mut score = sim.similarity(&a.predicate, &b.predicate)?;
    if score <= tau {
        return Ok(None);
    }
    let mut s = subst.clone();
    for (x, y) in a.args.iter().zip(&b.args) {
        let x = s.walk(x).clone();
        let y = s.walk(y).clone();
        match (x, y) {
            (Term::Var(u), Term::Var(v)) if u == v => {}
            (Term::Var(u), t) | (t, Term::Var(u)) => s.bind(u, t),
            (Term::Const(c), Term::Const(d)) => {
                score = score.min(sim.similarity(&c, &d)?);
                if score <= tau {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(UnifyResult {
        substitution: s.normalized()?,
        similarity: score,
    }))
}

/// One way two clauses resolve.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub resolvent: Clause,
    pub similarity: f64,
    pub substitution: Substitution,
    /// Index of the resolved literal in the first clause.
    pub left: usize,
    /// Index of the resolved literal in the second clause.
    pub right: usize,
}

/// Renames every variable `V` of `c` to `V_n`.
pub fn rename_clause(c: &Clause, n: usize) -> Clause {
    let rename = |t: &Term| match t {
        Term::Var(v) => Term::Var(format!("{v}_{n}")),
        other => other.clone(),
    };
    Clause {
        literals: c
            .literals
            .iter()
            .map(|l| Literal {
                positive: l.positive,
                predicate: l.predicate.clone(),
                args: l.args.iter().map(rename).collect(),
            })
            .collect(),
    }
}

/// Binary resolvent: every other literal of both parents under `s`.
pub(crate) fn combine(c1: &Clause, i: usize, c2: &Clause, j: usize, s: &Substitution) -> Clause {
    let lits = c1
        .literals
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .chain(c2.literals.iter().enumerate().filter(|&(k, _)| k != j))
        .map(|(_, l)| s.apply_literal(l))
        .collect();
    Clause::new(lits)
}

/// Every resolvent of `c1` and `c2` on a complementary pair whose atoms
/// unify above the threshold. `c2` is renamed apart first if the clauses
/// share variables. Repeated resolvents keep their best score.
pub fn resolve(
    c1: &Clause,
    c2: &Clause,
    config: &ProverConfig,
    sim: &dyn SimilarityFn,
) -> Result<Vec<Resolution>, ProverError> {
    let vars1 = c1.variables();
    let renamed;
    let c2 = if c2.variables().iter().any(|v| vars1.contains(v)) {
        let mut n = 0;
        loop {
            let candidate = rename_clause(c2, n);
            if candidate.variables().iter().all(|v| !vars1.contains(v)) {
                renamed = candidate;
                break;
            }
            n += 1;
        }
        &renamed
    } else {
        c2
    };
    let mut out: Vec<Resolution> = Vec::new();
    for (i, a) in c1.literals.iter().enumerate() {
        for (j, b) in c2.literals.iter().enumerate() {
            if a.positive == b.positive || a.arity() != b.arity() {
                continue;
            }
            let Some(u) = unify(a, b, &Substitution::new(), config, sim)? else {
                continue;
            };
            let resolvent = combine(c1, i, c2, j, &u.substitution);
            match out.iter_mut().find(|r| r.resolvent == resolvent) {
                Some(r) if r.similarity >= u.similarity => {}
                Some(r) => {
                    *r = Resolution {
                        resolvent,
                        similarity: u.similarity,
                        substitution: u.substitution,
                        left: i,
                        right: j,
                    }
                }
                None => out.push(Resolution {
                    resolvent,
                    similarity: u.similarity,
                    substitution: u.substitution,
                    left: i,
                    right: j,
                }),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_clause, parse_literal};
    use crate::similarity::{Embedding, ExactMatch, HybridSimilarity, Symbol};

    fn lit(s: &str) -> Literal {
        parse_literal(s).unwrap()
    }

    fn cfg(t: f64) -> ProverConfig {
        ProverConfig::with_threshold(t)
    }

    #[test]
    fn binds_variable_to_constant() {
        let u = unify(&lit("father(homer, bart)"), &lit("father(homer, Y)"), &Substitution::new(), &cfg(0.5), &ExactMatch)
            .unwrap()
            .unwrap();
        assert_eq!(u.similarity, 1.0);
        assert_eq!(u.substitution.get("Y"), Some(&Term::constant("bart")));
        assert_eq!(u.substitution.len(), 1);
    }

    #[test]
    fn different_predicates_fail_under_exact_match() {
        let r = unify(&lit("dad(homer, Y)"), &lit("father(homer, bart)"), &Substitution::new(), &cfg(0.5), &ExactMatch);
        assert_eq!(r, Ok(None));
    }

    #[test]
    fn variable_cannot_take_two_values() {
        let r = unify(&lit("p(X, X)"), &lit("p(a, b)"), &Substitution::new(), &cfg(0.5), &ExactMatch);
        assert_eq!(r, Ok(None));
        let ok = unify(&lit("p(X, X)"), &lit("p(a, a)"), &Substitution::new(), &cfg(0.5), &ExactMatch).unwrap();
        assert!(ok.is_some());
        let chain = unify(&lit("p(X, Y, X)"), &lit("p(Y, Z, a)"), &Substitution::new(), &cfg(0.5), &ExactMatch)
            .unwrap()
            .unwrap();
        for v in ["X", "Y", "Z"] {
            assert_eq!(chain.substitution.get(v), Some(&Term::constant("a")), "{v}");
        }
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let r = unify(&lit("p(a)"), &lit("p(a, b)"), &Substitution::new(), &cfg(0.5), &ExactMatch);
        assert!(matches!(r, Err(ProverError::ArityMismatch { .. })));
    }

    #[test]
    fn embedding_similarity_gates_unification() {
        // unit vectors with cosine 0.92
        let c: f64 = 0.92;
        let dad = Embedding::new(vec![1.0, 0.0]).unwrap();
        let father = Embedding::new(vec![c, (1.0 - c * c).sqrt()]).unwrap();
        let a = Literal::new(Symbol::with_embedding("dad", Some(dad)), vec![Term::constant("homer"), Term::var("Y")]);
        let b = Literal::new(
            Symbol::with_embedding("father", Some(father)),
            vec![Term::constant("homer"), Term::constant("bart")],
        );
        let u = unify(&a, &b, &Substitution::new(), &cfg(0.9), &HybridSimilarity).unwrap().unwrap();
        assert!((u.similarity - 0.96).abs() < 1e-12);
        assert!(unify(&a, &b, &Substitution::new(), &cfg(0.96), &HybridSimilarity).unwrap().is_none());
    }

    #[test]
    fn threshold_is_strict() {
        let r = unify(&lit("p(a)"), &lit("p(a)"), &Substitution::new(), &cfg(1.0), &ExactMatch);
        assert_eq!(r, Ok(None));
    }

    #[test]
    fn existing_bindings_are_respected() {
        let mut s = Substitution::new();
        s.bind("X", Term::constant("b"));
        assert_eq!(unify(&lit("p(X)"), &lit("p(a)"), &s, &cfg(0.5), &ExactMatch), Ok(None));
        assert!(unify(&lit("p(X)"), &lit("p(b)"), &s, &cfg(0.5), &ExactMatch).unwrap().is_some());
    }

    #[test]
    fn resolution_examples() {
        let c = |s: &str| parse_clause(s).unwrap();
        let r = resolve(&c("p(a)"), &c("!p(X) | q(X)"), &cfg(0.5), &ExactMatch).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].resolvent, c("q(a)"));
        assert_eq!(r[0].similarity, 1.0);
        assert_eq!(r[0].substitution.get("X"), Some(&Term::constant("a")));

        assert!(resolve(&c("p(a)"), &c("q(b)"), &cfg(0.5), &ExactMatch).unwrap().is_empty());

        let done = resolve(&c("BAD(h)"), &c("!BAD(H)"), &cfg(0.5), &ExactMatch).unwrap();
        assert_eq!(done.len(), 1);
        assert!(done[0].resolvent.is_empty());
    }

    #[test]
    fn resolve_renames_shared_variables() {
        let c = |s: &str| parse_clause(s).unwrap();
        let r = resolve(&c("p(X) | r(X)"), &c("!p(a) | q(X)"), &cfg(0.5), &ExactMatch).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].resolvent.to_string(), "r(a) | q(X_0)");
    }

    #[test]
    fn resolvent_drops_duplicates() {
        let c = |s: &str| parse_clause(s).unwrap();
        let r = resolve(&c("!p(a) | q(a)"), &c("p(X) | q(X)"), &cfg(0.5), &ExactMatch).unwrap();
        assert_eq!(r[0].resolvent.to_string(), "q(a)");
    }
}
