//! Golden conversion files and formula equivalence up to variable renaming
//! and conjunct order.

use std::fs;

use reasoner_core::amr::AlignedAmrDocument;
use reasoner_core::logic::{
    amr_to_formula, parse_formula, rot_to_implication, sst_to_facts, Formula, Notation, Term, VerdictLexicon,
};
use serde::Deserialize;

use super::fixtures;

#[derive(Debug, Deserialize)]
pub struct Golden {
    #[serde(skip)]
    pub name: String,
    pub input: String,
    pub mode: String,
    pub reference: String,
    #[serde(default)]
    pub corrections: Vec<(String, String)>,
    pub emitted: String,
}

impl Golden {
    /// The reference form with its documented corrections applied. Panics
    /// if a correction does not apply, so none can go stale silently.
    pub fn corrected_reference(&self) -> String {
        let mut text = self.reference.clone();
        for (from, to) in &self.corrections {
            assert!(text.contains(from.as_str()), "{}: correction {from:?} does not apply", self.name);
            text = text.replacen(from.as_str(), to, 1);
        }
        text
    }
}

pub fn load_all() -> Vec<Golden> {
    let dir = fixtures().join("golden");
    let mut paths: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let mut g: Golden = toml::from_str(&fs::read_to_string(p).unwrap()).unwrap();
            g.name = p.file_stem().unwrap().to_string_lossy().into_owned();
            g
        })
        .collect()
}

/// Runs the conversion named by `mode` and renders it in plain notation.
pub fn convert(g: &Golden) -> String {
    let doc = AlignedAmrDocument::load(fixtures().join(&g.input)).unwrap();
    let tree = doc.to_tree().unwrap();
    let n = Notation::plain();
    match g.mode.as_str() {
        "formula" => n.formula(&amr_to_formula(&tree).unwrap()),
        "rule" => n.implication(&rot_to_implication(&tree, &VerdictLexicon::builtin()).unwrap()),
        "facts" => sst_to_facts(&tree, "")
            .unwrap()
            .iter()
            .map(|l| n.literal(l))
            .collect::<Vec<_>>()
            .join(" & "),
        other => panic!("unknown mode {other}"),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Arg {
    Var(String),
    Const(String),
}

#[derive(Clone, Debug)]
enum F {
    Lit(bool, String, Vec<Arg>),
    And(Vec<F>),
    Not(Box<F>),
    Exists(String, Box<F>),
    Implies(Box<F>, Box<F>),
}

fn lower(f: &Formula) -> F {
    match f {
        Formula::Atom(l) => F::Lit(
            l.positive,
            l.predicate.name.clone(),
            l.args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => Arg::Var(v.clone()),
                    Term::Const(c) => Arg::Const(c.name.clone()),
                })
                .collect(),
        ),
        Formula::And(parts) => {
            let mut flat = Vec::new();
            for p in parts {
                match lower(p) {
                    F::And(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            F::And(flat)
        }
        Formula::Not(x) => F::Not(Box::new(lower(x))),
        Formula::Exists(v, x) => F::Exists(v.clone(), Box::new(lower(x))),
        Formula::Implies(a, b) => F::Implies(Box::new(lower(a)), Box::new(lower(b))),
    }
}

/// A partial bijection between the variables of two formulas.
type Bij = Vec<(String, String)>;

fn pair(m: &Bij, x: &str, y: &str) -> Option<Bij> {
    match (m.iter().find(|(a, _)| a == x), m.iter().find(|(_, b)| b == y)) {
        (Some((_, b)), _) => (b == y).then(|| m.clone()),
        (None, Some(_)) => None,
        (None, None) => {
            let mut out = m.clone();
            out.push((x.to_string(), y.to_string()));
            Some(out)
        }
    }
}

/// Every extension of `m` under which `a` and `b` are equal.
fn matches(a: &F, b: &F, m: &Bij) -> Vec<Bij> {
    match (a, b) {
        (F::Lit(s1, p1, a1), F::Lit(s2, p2, a2)) => {
            if s1 != s2 || p1 != p2 || a1.len() != a2.len() {
                return Vec::new();
            }
            let mut cur = m.clone();
            for (x, y) in a1.iter().zip(a2) {
                cur = match (x, y) {
                    (Arg::Const(c), Arg::Const(d)) if c == d => cur,
                    (Arg::Var(u), Arg::Var(v)) => match pair(&cur, u, v) {
                        Some(n) => n,
                        None => return Vec::new(),
                    },
                    _ => return Vec::new(),
                };
            }
            vec![cur]
        }
        (F::Not(x), F::Not(y)) => matches(x, y, m),
        (F::Exists(u, x), F::Exists(v, y)) => match pair(m, u, v) {
            Some(n) => matches(x, y, &n),
            None => Vec::new(),
        },
        (F::Implies(a1, b1), F::Implies(a2, b2)) => matches(a1, a2, m)
            .iter()
            .flat_map(|n| matches(b1, b2, n))
            .collect(),
        (F::And(xs), F::And(ys)) if xs.len() == ys.len() => {
            let mut used = vec![false; ys.len()];
            let mut out = Vec::new();
            permute(xs, ys, 0, &mut used, m, &mut out);
            out
        }
        _ => Vec::new(),
    }
}

fn permute(xs: &[F], ys: &[F], i: usize, used: &mut Vec<bool>, m: &Bij, out: &mut Vec<Bij>) {
    if i == xs.len() {
        out.push(m.clone());
        return;
    }
    for j in 0..ys.len() {
        if used[j] {
            continue;
        }
        for n in matches(&xs[i], &ys[j], m) {
            used[j] = true;
            permute(xs, ys, i + 1, used, &n, out);
            used[j] = false;
        }
    }
}

/// Whether two formulas in plain notation are equal up to a consistent
/// renaming of variables and reordering of conjuncts.
pub fn equivalent(a: &str, b: &str) -> bool {
    let fa = lower(&parse_formula(a).unwrap_or_else(|e| panic!("{a}: {e}")));
    let fb = lower(&parse_formula(b).unwrap_or_else(|e| panic!("{b}: {e}")));
    !matches(&fa, &fb, &Vec::new()).is_empty()
}
