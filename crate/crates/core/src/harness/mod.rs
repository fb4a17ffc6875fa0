//! Matching rules of thumb to situations, and evaluating that matching.

mod corpus;
mod eval;
mod report;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amr::{AlignedAmrDocument, AmrError, AmrTree};
use crate::logic::{implication_clause, rot_to_implication, sst_to_facts, to_clauses, Clause, Implication, Literal, LogicError, Verdict, VerdictLexicon};
use crate::merge::{enumerate_merge_trees, MergeConfig, MergeError};
use crate::prover::{prove, Proof, ProofStatus, ProverConfig, ProverError};
use crate::similarity::HybridSimilarity;

pub use corpus::{load_corpus, Sample};
pub use eval::{
    bucket_by_collapsability, evaluate, negative_pairing, sweep, BucketRow, EvalMetrics, EvalRecord, Evaluation,
    NegativeOutcome, PositiveOutcome, SampleError, SweepAxis, SweepRow,
};
pub use report::{proof_summary, ProofSummary, ReportLine, StepSummary};
pub use stats::{dataset_stats, DatasetStats, DocNumbers, DocStats, Summary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("{id}: {source}")]
    Document { id: String, source: AmrError },
    #[error("{id}: {source}")]
    Logic { id: String, source: LogicError },
    #[error("{id}: {source}")]
    Merge { id: String, source: MergeError },
    #[error("{id}: {source}")]
    Prover { id: String, source: ProverError },
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("configuration: {0}")]
    Config(String),
}

/// A sweep request: one axis and the values to try.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Everything that determines a run. Serialized into every report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub prover: ProverConfig,
    pub merge: MergeConfig,
    pub rng_seed: u64,
    #[serde(default)]
    pub dataset: Option<String>,
    /// Query all four verdicts instead of only the rule's own consequent.
    #[serde(default)]
    pub all_verdicts: bool,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub buckets: Option<Vec<f64>>,
    #[serde(default)]
    pub lexicon: VerdictLexicon,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.prover
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.merge
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))
    }
}

/// One merged variant of a rule, converted to its clause.
#[derive(Clone, Debug)]
pub struct RuleVariant {
    pub implication: Implication,
    pub clause: Clause,
    pub merge_width: usize,
}

/// A rule-of-thumb document expanded into merge variants (original first).
#[derive(Clone, Debug)]
pub struct PreparedRot {
    pub id: String,
    pub tree: AmrTree,
    pub variants: Vec<RuleVariant>,
    pub collapsability: Option<f64>,
}

/// A situation document expanded into merge variants (original first).
#[derive(Clone, Debug)]
pub struct PreparedSst {
    pub id: String,
    pub tree: AmrTree,
    pub variants: Vec<(Vec<Clause>, usize)>,
    pub collapsability: Option<f64>,
}

fn doc_tree(doc: &AlignedAmrDocument) -> Result<AmrTree, HarnessError> {
    doc.to_tree().map_err(|source| HarnessError::Document {
        id: doc.id.clone(),
        source,
    })
}

fn variants(tree: &AmrTree, id: &str, config: &MergeConfig) -> Result<(Vec<AmrTree>, Option<f64>), HarnessError> {
    let set = enumerate_merge_trees(tree, config).map_err(|source| HarnessError::Merge {
        id: id.to_string(),
        source,
    })?;
    let coll = set.collapsability().ok();
    Ok((set.trees().cloned().collect(), coll))
}

pub fn prepare_rot(doc: &AlignedAmrDocument, config: &RunConfig) -> Result<PreparedRot, HarnessError> {
    let tree = doc_tree(doc)?;
    let (trees, collapsability) = variants(&tree, &doc.id, &config.merge)?;
    let variants = trees
        .iter()
        .map(|t| {
            let implication = rot_to_implication(t, &config.lexicon).map_err(|source| HarnessError::Logic {
                id: doc.id.clone(),
                source,
            })?;
            Ok(RuleVariant {
                clause: implication_clause(&implication),
                implication,
                merge_width: t.merge_width(),
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(PreparedRot {
        id: doc.id.clone(),
        tree,
        variants,
        collapsability,
    })
}

pub fn prepare_sst(doc: &AlignedAmrDocument, config: &RunConfig) -> Result<PreparedSst, HarnessError> {
    let tree = doc_tree(doc)?;
    let (trees, collapsability) = variants(&tree, &doc.id, &config.merge)?;
    let variants = trees
        .iter()
        .map(|t| {
            let facts = sst_to_facts(t, &doc.id).map_err(|source| HarnessError::Logic {
                id: doc.id.clone(),
                source,
            })?;
            Ok((to_clauses(&facts), t.merge_width()))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(PreparedSst {
        id: doc.id.clone(),
        tree,
        variants,
        collapsability,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub matched: bool,
    pub verdict: Option<Verdict>,
    pub proof: Option<Proof>,
    pub best_similarity: Option<f64>,
    pub rot_variant_index: Option<usize>,
    pub sst_variant_index: Option<usize>,
    /// The knowledge base the winning proof was found in.
    pub kb: Option<Vec<Clause>>,
    pub pairs_tried: usize,
    /// Some search stopped at a depth, width, or expansion cap.
    pub cap_hit: bool,
}

/// Variant pairs in search order: the two originals first, then by total
/// merge width, then by index.
pub fn pair_order(rot: &PreparedRot, sst: &PreparedSst) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize, usize)> = (0..rot.variants.len())
        .flat_map(|i| (0..sst.variants.len()).map(move |j| (i, j)))
        .map(|(i, j)| (rot.variants[i].merge_width + sst.variants[j].1, i, j))
        .collect();
    pairs.sort();
    pairs.into_iter().map(|(_, i, j)| (i, j)).collect()
}

/// Searches every variant pair for the best-scoring proof of the rule's
/// verdict (or of any verdict with `all_verdicts`). Once a proof is found,
/// later searches only accept strictly better ones; a perfect score stops
/// the search.
pub fn match_prepared(rot: &PreparedRot, sst: &PreparedSst, config: &RunConfig) -> Result<MatchResult, HarnessError> {
    let mut prover = config.prover.clone();
    let mut best: Option<(Proof, Literal, usize, usize, Vec<Clause>)> = None;
    let mut tried = 0;
    let mut cap_hit = false;
    'pairs: for (i, j) in pair_order(rot, sst) {
        tried += 1;
        let rule = &rot.variants[i];
        let mut kb = sst.variants[j].0.clone();
        kb.push(rule.clause.clone());
        let var = rule.consequent_var();
        let goals: Vec<Literal> = if config.all_verdicts {
            Verdict::ALL.iter().map(|v| v.literal(&var)).collect()
        } else {
            vec![rule.implication.consequent.clone()]
        };
        for goal in goals {
            let out = prove(&kb, &goal, &prover, &HybridSimilarity).map_err(|source| HarnessError::Prover {
                id: format!("{}/{}", rot.id, sst.id),
                source,
            })?;
            cap_hit |= out.status == ProofStatus::ResourceCapExceeded;
            if let Some(p) = out.proof {
                let better = best.as_ref().is_none_or(|b| p.similarity > b.0.similarity);
                if better {
                    prover.similarity_threshold = p.similarity;
                    let perfect = p.similarity >= 1.0;
                    best = Some((p, goal, i, j, kb.clone()));
                    if perfect {
                        break 'pairs;
                    }
                }
            }
        }
    }
    Ok(match best {
        Some((proof, goal, i, j, kb)) => MatchResult {
            matched: true,
            verdict: Verdict::of_literal(&goal),
            best_similarity: Some(proof.similarity),
            proof: Some(proof),
            rot_variant_index: Some(i),
            sst_variant_index: Some(j),
            kb: Some(kb),
            pairs_tried: tried,
            cap_hit,
        },
        None => MatchResult {
            matched: false,
            verdict: None,
            proof: None,
            best_similarity: None,
            rot_variant_index: None,
            sst_variant_index: None,
            kb: None,
            pairs_tried: tried,
            cap_hit,
        },
    })
}

impl RuleVariant {
    fn consequent_var(&self) -> String {
        self.implication
            .consequent
            .variables()
            .next()
            .unwrap_or("X")
            .to_string()
    }
}

/// Parses, expands, and matches one rule/situation pair.
pub fn match_rot_sst(
    rot_doc: &AlignedAmrDocument,
    sst_doc: &AlignedAmrDocument,
    config: &RunConfig,
) -> Result<MatchResult, HarnessError> {
    config.validate()?;
    let rot = prepare_rot(rot_doc, config)?;
    let sst = prepare_sst(sst_doc, config)?;
    match_prepared(&rot, &sst, config)
}
