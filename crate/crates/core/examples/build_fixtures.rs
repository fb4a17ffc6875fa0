//! Regenerates the bundled fixture documents from `fixtures/corpus.toml`.
//!
//! Token vectors are synthetic. Every "meaning" name gets its own direction,
//! and the directions are made exactly orthonormal, so a token's vector
//! (the normalized weighted mix of its meanings, plus a little seeded noise)
//! has the cosines its mix weights say and nothing else.
//!
//!     cargo run -p reasoner-core --example build_fixtures

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use reasoner_core::amr::{parse_penman, AlignedAmrDocument};
use serde::Deserialize;

#[derive(Deserialize)]
struct Corpus {
    dimension: usize,
    noise: f64,
    #[serde(default)]
    meanings: BTreeMap<String, String>,
    #[serde(default)]
    sample: Vec<SampleSpec>,
    #[serde(default)]
    document: Vec<DocSpec>,
}

#[derive(Deserialize)]
struct SampleSpec {
    id: String,
    rot: DocSpec,
    sst: DocSpec,
}

#[derive(Deserialize)]
struct DocSpec {
    #[serde(default)]
    id: Option<String>,
    text: String,
    penman: String,
    /// Instance label (or a node path starting with `:`) to aligned words.
    /// `word#2` picks the second occurrence.
    #[serde(default)]
    align: BTreeMap<String, String>,
    /// Per-document overrides of the shared meaning table.
    #[serde(default)]
    meanings: BTreeMap<String, String>,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn gaussian(seed: &str, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(seed));
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Gram-Schmidt over seeded Gaussian vectors, in name order.
fn directions(names: &BTreeSet<String>, dim: usize) -> Result<BTreeMap<String, Vec<f64>>, String> {
    if names.len() > dim {
        return Err(format!("{} meanings do not fit in {dim} dimensions", names.len()));
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut out = BTreeMap::new();
    for name in names {
        let mut v = gaussian(&format!("dir:{name}"), dim);
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        normalize(&mut v);
        basis.push(v.clone());
        out.insert(name.clone(), v);
    }
    Ok(out)
}

/// `"person:0.8 kin:0.6"` or a bare `"person"`.
fn parse_mix(spec: &str) -> Result<Vec<(String, f64)>, String> {
    spec.split_whitespace()
        .map(|part| match part.rsplit_once(':') {
            Some((name, w)) => w
                .parse::<f64>()
                .map(|w| (name.to_string(), w))
                .map_err(|e| format!("bad weight in {spec:?}: {e}")),
            None => Ok((part.to_string(), 1.0)),
        })
        .collect()
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut w = word;
        let mut tail = Vec::new();
        while let Some(last) = w.chars().last().filter(|c| ".,!?".contains(*c)) {
            tail.push(last.to_string());
            w = &w[..w.len() - last.len_utf8()];
        }
        for suffix in ["'s", "n't"] {
            if let Some(stem) = w.strip_suffix(suffix).filter(|s| !s.is_empty()) {
                out.push(stem.to_string());
                w = suffix;
            }
        }
        if !w.is_empty() {
            out.push(w.to_string());
        }
        out.extend(tail.into_iter().rev());
    }
    out
}

fn find_token(tokens: &[String], word: &str) -> Result<usize, String> {
    let (w, nth) = match word.split_once('#') {
        Some((w, n)) => (w, n.parse::<usize>().map_err(|e| e.to_string())?),
        None => (word, 1),
    };
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.eq_ignore_ascii_case(w))
        .nth(nth - 1)
        .map(|(i, _)| i)
        .ok_or_else(|| format!("no token {word:?} in {tokens:?}"))
}

fn token_mixes(spec: &DocSpec, corpus: &Corpus) -> Result<Vec<Vec<(String, f64)>>, String> {
    tokenize(&spec.text)
        .iter()
        .map(|tok| {
            let key = tok.to_lowercase();
            let mix = spec
                .meanings
                .get(&key)
                .or_else(|| corpus.meanings.get(&key))
                .cloned()
                .unwrap_or(key);
            parse_mix(&mix)
        })
        .collect()
}

fn build(
    spec: &DocSpec,
    id: &str,
    corpus: &Corpus,
    dirs: &BTreeMap<String, Vec<f64>>,
) -> Result<AlignedAmrDocument, String> {
    let tree = parse_penman(&spec.penman).map_err(|e| format!("{id}: {e}"))?;
    let tokens = tokenize(&spec.text);
    let token_embeddings = token_mixes(spec, corpus)?
        .into_iter()
        .enumerate()
        .map(|(i, mix)| {
            let mut v = vec![0.0; corpus.dimension];
            for (name, w) in mix {
                for (x, d) in v.iter_mut().zip(&dirs[&name]) {
                    *x += w * d;
                }
            }
            normalize(&mut v);
            let scale = corpus.noise / (corpus.dimension as f64).sqrt();
            for (x, n) in v.iter_mut().zip(gaussian(&format!("noise:{id}:{i}"), corpus.dimension)) {
                *x += scale * n;
            }
            Ok(v.into_iter().map(|x| x as f32).collect())
        })
        .collect::<Result<Vec<Vec<f32>>, String>>()?;
    let mut node_alignments = BTreeMap::new();
    for (key, words) in &spec.align {
        let path = if key.starts_with(':') {
            key.clone()
        } else {
            let node = tree
                .instance_by_label(key)
                .ok_or_else(|| format!("{id}: no instance {key:?}"))?;
            tree.path(node).to_string()
        };
        let idx = words
            .split_whitespace()
            .map(|w| find_token(&tokens, w))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("{id}: {e}"))?;
        node_alignments.insert(path, idx);
    }
    let doc = AlignedAmrDocument {
        id: id.to_string(),
        text: spec.text.clone(),
        penman: spec.penman.clone(),
        tokens,
        node_alignments,
        token_embeddings,
    };
    doc.to_tree().map_err(|e| format!("{id}: {e}"))?;
    Ok(doc)
}

fn write(path: &Path, doc: &AlignedAmrDocument) -> Result<(), String> {
    fs::write(path, doc.to_json() + "\n").map_err(|e| format!("{}: {e}", path.display()))
}

fn run() -> Result<(), String> {
    let root: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize().map_err(|e| e.to_string())?;
    let source = fs::read_to_string(root.join("corpus.toml")).map_err(|e| e.to_string())?;
    let corpus: Corpus = toml::from_str(&source).map_err(|e| e.to_string())?;

    let mut names = BTreeSet::new();
    let specs = corpus
        .sample
        .iter()
        .flat_map(|s| [&s.rot, &s.sst])
        .chain(&corpus.document);
    for spec in specs {
        for mix in token_mixes(spec, &corpus)? {
            names.extend(mix.into_iter().map(|(n, _)| n));
        }
    }
    let dirs = directions(&names, corpus.dimension)?;

    let corpus_dir = root.join("corpus");
    let docs_dir = root.join("documents");
    for dir in [&corpus_dir, &docs_dir] {
        if dir.exists() {
            fs::remove_dir_all(dir).map_err(|e| e.to_string())?;
        }
        fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    }
    for s in &corpus.sample {
        let rot = build(&s.rot, &format!("{}-rot", s.id), &corpus, &dirs)?;
        let sst = build(&s.sst, &format!("{}-sst", s.id), &corpus, &dirs)?;
        write(&corpus_dir.join(format!("{}.rot.json", s.id)), &rot)?;
        write(&corpus_dir.join(format!("{}.sst.json", s.id)), &sst)?;
    }
    for d in &corpus.document {
        let id = d.id.clone().ok_or("standalone documents need an id")?;
        write(&docs_dir.join(format!("{id}.json")), &build(d, &id, &corpus, &dirs)?)?;
    }
    println!(
        "wrote {} pairs and {} documents ({} meanings) under {}",
        corpus.sample.len(),
        corpus.document.len(),
        names.len(),
        root.display()
    );
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("build_fixtures: {e}");
        std::process::exit(1);
    }
}
