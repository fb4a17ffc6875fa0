use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{proof_summary, ProofSummary};
use super::{match_prepared, prepare_rot, prepare_sst, HarnessError, RunConfig, Sample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositiveOutcome {
    #[serde(rename = "TP")]
    TruePositive,
    #[serde(rename = "FN")]
    FalseNegative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegativeOutcome {
    #[serde(rename = "FP")]
    FalsePositive,
    #[serde(rename = "TN")]
    TrueNegative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub sample_id: String,
    pub negative_rot_id: String,
    pub positive_outcome: PositiveOutcome,
    pub negative_outcome: NegativeOutcome,
    pub positive_similarity: Option<f64>,
    pub negative_similarity: Option<f64>,
    pub positive_verdict: Option<String>,
    pub collapsability_rot: Option<f64>,
    pub collapsability_sst: Option<f64>,
    /// Minimum of the two defined values above.
    pub collapsability: Option<f64>,
    pub cap_hit: bool,
    pub positive_proof: Option<ProofSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleError {
    pub sample_id: String,
    pub message: String,
}

/// Confusion counts and derived scores. A score is `None` when its
/// denominator is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl EvalMetrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        Self {
            tp,
            fp,
            tn,
            fn_,
            precision,
            recall,
            f1,
        }
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a EvalRecord>) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for r in records {
            match r.positive_outcome {
                PositiveOutcome::TruePositive => tp += 1,
                PositiveOutcome::FalseNegative => fn_ += 1,
            }
            match r.negative_outcome {
                NegativeOutcome::FalsePositive => fp += 1,
                NegativeOutcome::TrueNegative => tn += 1,
            }
        }
        Self::from_counts(tp, fp, tn, fn_)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub metrics: EvalMetrics,
    pub records: Vec<EvalRecord>,
    pub errors: Vec<SampleError>,
}

/// For each sample, the index of a different sample whose rule serves as
/// the negative. Drawn uniformly and independently from a seeded stream.
pub fn negative_pairing(n: usize, seed: u64) -> Result<Vec<usize>, HarnessError> {
    if n < 2 {
        return Err(HarnessError::Config(
            "negative sampling needs at least two samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|i| {
            let j = rng.gen_range(0..n - 1);
            if j >= i {
                j + 1
            } else {
                j
            }
        })
        .collect())
}

/// Runs the positive match and one negative match per sample.
///
/// Samples are processed in parallel; records come back in input order.
/// A sample whose documents fail to load or convert is reported in
/// `errors` and left out of the counts.
pub fn evaluate(samples: &[Sample], config: &RunConfig) -> Result<Evaluation, HarnessError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(HarnessError::Config("dataset is empty".into()));
    }
    let negatives = negative_pairing(samples.len(), config.rng_seed)?;
    let rots: Vec<_> = samples.par_iter().map(|s| prepare_rot(&s.rot, config)).collect();
    let ssts: Vec<_> = samples.par_iter().map(|s| prepare_sst(&s.sst, config)).collect();

    let results: Vec<Result<EvalRecord, SampleError>> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let neg = negatives[i];
            let run = || -> Result<EvalRecord, HarnessError> {
                let rot = rots[i].as_ref().map_err(Clone::clone)?;
                let sst = ssts[i].as_ref().map_err(Clone::clone)?;
                let neg_rot = rots[neg].as_ref().map_err(Clone::clone)?;
                let pos = match_prepared(rot, sst, config)?;
                let negm = match_prepared(neg_rot, sst, config)?;
                let collapsability = match (rot.collapsability, sst.collapsability) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                Ok(EvalRecord {
                    sample_id: samples[i].id.clone(),
                    negative_rot_id: samples[neg].id.clone(),
                    positive_outcome: if pos.matched {
                        PositiveOutcome::TruePositive
                    } else {
                        PositiveOutcome::FalseNegative
                    },
                    negative_outcome: if negm.matched {
                        NegativeOutcome::FalsePositive
                    } else {
                        NegativeOutcome::TrueNegative
                    },
                    positive_similarity: pos.best_similarity,
                    negative_similarity: negm.best_similarity,
                    positive_verdict: pos.verdict.map(|v| v.to_string()),
                    collapsability_rot: rot.collapsability,
                    collapsability_sst: sst.collapsability,
                    collapsability,
                    cap_hit: pos.cap_hit || negm.cap_hit,
                    positive_proof: proof_summary(&pos),
                })
            };
            run().map_err(|e| SampleError {
                sample_id: samples[i].id.clone(),
                message: e.to_string(),
            })
        })
        .collect();

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => errors.push(e),
        }
    }
    Ok(Evaluation {
        metrics: EvalMetrics::from_records(&records),
        records,
        errors,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Threshold,
    MaxMergeWidth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub config: RunConfig,
    pub metrics: EvalMetrics,
    pub errors: usize,
    /// Samples whose own rule matched.
    pub matched_positive: Vec<String>,
    /// Samples whose negative rule matched.
    pub matched_negative: Vec<String>,
}

/// Re-runs [`evaluate`] once per value with everything else fixed,
/// including the seed and therefore the negative pairing.
pub fn sweep(samples: &[Sample], config: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::Config("sweep needs at least one value".into()));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(HarnessError::Config("sweep values must be sorted".into()));
    }
    values
        .iter()
        .map(|&value| {
            let mut cfg = config.clone();
            match axis {
                SweepAxis::Threshold => cfg.prover.similarity_threshold = value,
                SweepAxis::MaxMergeWidth => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(HarnessError::Config(format!("merge width {value} is not a positive integer")));
                    }
                    cfg.merge.max_merge_width = value as usize;
                }
            }
            let ev = evaluate(samples, &cfg)?;
            let ids = |keep: &dyn Fn(&super::EvalRecord) -> bool| {
                ev.records.iter().filter(|r| keep(r)).map(|r| r.sample_id.clone()).collect()
            };
            Ok(SweepRow {
                axis,
                value,
                matched_positive: ids(&|r| r.positive_outcome == PositiveOutcome::TruePositive),
                matched_negative: ids(&|r| r.negative_outcome == NegativeOutcome::FalsePositive),
                config: cfg,
                metrics: ev.metrics,
                errors: ev.errors.len(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub lower: f64,
    pub upper: f64,
    /// The last bucket includes its upper edge.
    pub upper_inclusive: bool,
    pub count: usize,
    pub metrics: EvalMetrics,
}

/// Splits records into `[e0, e1), [e1, e2), ..., [e(n-1), en]` by their
/// collapsability and scores each bucket. Records without a value or
/// outside the edges are left out.
pub fn bucket_by_collapsability(records: &[EvalRecord], edges: &[f64]) -> Result<Vec<BucketRow>, HarnessError> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) {
        return Err(HarnessError::Config(
            "bucket edges need at least two strictly increasing values".into(),
        ));
    }
    let last = edges.len() - 2;
    let mut groups: Vec<Vec<&EvalRecord>> = vec![Vec::new(); edges.len() - 1];
    for r in records {
        let Some(c) = r.collapsability else { continue };
        let slot = (0..=last).find(|&k| edges[k] <= c && (c < edges[k + 1] || (k == last && c == edges[k + 1])));
        if let Some(k) = slot {
            groups[k].push(r);
        }
    }
    Ok(groups
        .into_iter()
        .enumerate()
        .map(|(k, g)| BucketRow {
            lower: edges[k],
            upper: edges[k + 1],
            upper_inclusive: k == last,
            count: g.len(),
            metrics: EvalMetrics::from_records(g),
        })
        .collect())
}
