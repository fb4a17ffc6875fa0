//! A classical resolution prover used as a reference, and the problem suite
//! it is compared on.
//!
//! Problems are function-free, so the Herbrand universe is the finite set of
//! constants that occur. Every clause is grounded over it and the ground set
//! is saturated with the given-clause loop: binary resolution, tautology
//! deletion, and forward subsumption. The goal is provable exactly when the
//! knowledge base plus its negation is refutable.

use std::collections::{BTreeMap, BTreeSet};

use reasoner_core::logic::{parse_clauses, parse_literal, Clause, Literal, Term};

pub struct Problem {
    pub name: &'static str,
    pub kb: &'static str,
    pub goal: &'static str,
    pub provable: bool,
}

const MORTAL: &str = "man(socrates)\n!man(X) | mortal(X)";
const FAMILY: &str = "parent(a, b)\nparent(b, c)\n!parent(X, Y) | !parent(Y, Z) | grandparent(X, Z)";
const ANCESTOR: &str = "parent(a, b)\nparent(b, c)\nparent(c, d)\n!parent(X, Y) | anc(X, Y)\n!parent(X, Y) | !anc(Y, Z) | anc(X, Z)";
const PENGUIN: &str = "penguin(tweety)\nbird(robin)\n!penguin(X) | !fly(X)";
const WINE: &str = "likes(mary, wine)\n!likes(X, wine) | likes(john, X)";
const CHAIN: &str = "a(k)\n!a(X) | b(X)\n!b(X) | c(X)\n!c(X) | d(X)\n!d(X) | e(X)";
const BROKEN_CHAIN: &str = "a(k)\n!a(X) | b(X)\n!c(X) | d(X)";
const EDGES: &str = "edge(n1, n2)\nedge(n2, n3)\n!edge(X, Y) | !edge(Y, Z) | path2(X, Z)";
const ADMIRED: &str = "tall(p1)\nsmart(p1)\ntall(p2)\n!tall(X) | !smart(X) | admired(X)";
const FRIENDS: &str = "friend(a, b)\n!friend(X, Y) | friend(Y, X)";

pub const SUITE: [Problem; 20] = [
    Problem { name: "modus ponens", kb: MORTAL, goal: "mortal(socrates)", provable: true },
    Problem { name: "answer variable", kb: MORTAL, goal: "mortal(Y)", provable: true },
    Problem { name: "two-step join", kb: FAMILY, goal: "grandparent(a, c)", provable: true },
    Problem { name: "recursive ancestor", kb: ANCESTOR, goal: "anc(a, d)", provable: true },
    Problem { name: "negative goal", kb: PENGUIN, goal: "!fly(tweety)", provable: true },
    Problem { name: "rule on a fact argument", kb: WINE, goal: "likes(john, mary)", provable: true },
    Problem { name: "four-rule chain", kb: CHAIN, goal: "e(k)", provable: true },
    Problem { name: "open path", kb: EDGES, goal: "path2(n1, W)", provable: true },
    Problem { name: "shared body variable", kb: ADMIRED, goal: "admired(Z)", provable: true },
    Problem { name: "symmetry", kb: FRIENDS, goal: "friend(b, a)", provable: true },
    Problem { name: "unknown individual", kb: MORTAL, goal: "mortal(zeus)", provable: false },
    Problem { name: "broken join", kb: "parent(a, b)\nparent(c, d)\n!parent(X, Y) | !parent(Y, Z) | grandparent(X, Z)", goal: "grandparent(a, d)", provable: false },
    Problem { name: "wrong direction", kb: ANCESTOR, goal: "anc(d, a)", provable: false },
    Problem { name: "positive of a negative", kb: PENGUIN, goal: "fly(tweety)", provable: false },
    Problem { name: "no such fact", kb: WINE, goal: "likes(john, wine)", provable: false },
    Problem { name: "missing link", kb: BROKEN_CHAIN, goal: "d(k)", provable: false },
    Problem { name: "no loop", kb: EDGES, goal: "path2(n1, n1)", provable: false },
    Problem { name: "one premise short", kb: ADMIRED, goal: "admired(p2)", provable: false },
    Problem { name: "no reflexivity", kb: FRIENDS, goal: "friend(a, a)", provable: false },
    Problem { name: "different predicate", kb: "dad(homer, bart)", goal: "father(homer, bart)", provable: false },
];

pub fn clauses(p: &Problem) -> (Vec<Clause>, Literal) {
    (parse_clauses(p.kb).unwrap(), parse_literal(p.goal).unwrap())
}

type GroundClause = BTreeSet<(bool, String)>;

fn constants(c: &Clause, out: &mut BTreeSet<String>) {
    for l in &c.literals {
        for t in &l.args {
            if let Term::Const(s) = t {
                out.insert(s.name.clone());
            }
        }
    }
}

fn ground(c: &Clause, universe: &[String]) -> Vec<GroundClause> {
    let vars: Vec<String> = c.variables().into_iter().map(str::to_string).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; vars.len()];
    loop {
        let env: BTreeMap<&str, &str> = vars
            .iter()
            .zip(&choice)
            .map(|(v, &i)| (v.as_str(), universe[i].as_str()))
            .collect();
        let gc: GroundClause = c
            .literals
            .iter()
            .map(|l| {
                let args: Vec<&str> = l
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => env[v.as_str()],
                        Term::Const(s) => s.name.as_str(),
                    })
                    .collect();
                (l.positive, format!("{}({})", l.predicate.name, args.join(",")))
            })
            .collect();
        out.push(gc);
        // next assignment, odometer style
        let mut k = 0;
        loop {
            if k == choice.len() {
                return out;
            }
            choice[k] += 1;
            if choice[k] < universe.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn tautology(c: &GroundClause) -> bool {
    c.iter().any(|(s, a)| c.contains(&(!s, a.clone())))
}

fn subsumed(c: &GroundClause, by: &[GroundClause]) -> bool {
    by.iter().any(|d| d.is_subset(c))
}

/// Whether `kb` entails `goal` (existentially closed), decided by ground
/// resolution saturation.
pub fn entails(kb: &[Clause], goal: &Literal) -> bool {
    let negated = Clause::unit(goal.complement());
    let mut names = BTreeSet::new();
    for c in kb.iter().chain(std::iter::once(&negated)) {
        constants(c, &mut names);
    }
    if names.is_empty() {
        names.insert("c0".to_string());
    }
    let universe: Vec<String> = names.into_iter().collect();

    let mut unprocessed: Vec<GroundClause> = Vec::new();
    for c in kb.iter().chain(std::iter::once(&negated)) {
        for g in ground(c, &universe) {
            if !tautology(&g) && !unprocessed.contains(&g) {
                unprocessed.push(g);
            }
        }
    }
    let mut processed: Vec<GroundClause> = Vec::new();
    while !unprocessed.is_empty() {
        // shortest clause first
        let pick = (0..unprocessed.len()).min_by_key(|&i| unprocessed[i].len()).unwrap();
        let given = unprocessed.swap_remove(pick);
        if given.is_empty() {
            return true;
        }
        if subsumed(&given, &processed) {
            continue;
        }
        processed.retain(|d| !given.is_subset(d));
        for other in processed.iter().chain(std::iter::once(&given)) {
            for (s, a) in &given {
                if !other.contains(&(!s, a.clone())) {
                    continue;
                }
                let mut r: GroundClause = given.iter().filter(|l| *l != &(*s, a.clone())).cloned().collect();
                r.extend(other.iter().filter(|l| *l != &(!s, a.clone())).cloned());
                if r.is_empty() {
                    return true;
                }
                if !tautology(&r) && !subsumed(&r, &processed) && !unprocessed.contains(&r) {
                    unprocessed.push(r);
                }
            }
        }
        processed.push(given);
    }
    false
}
