use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::logic::Notation;
use crate::prover::Proof;

use super::MatchResult;

/// One resolution step rendered as text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub left: String,
    pub right: String,
    pub right_source: String,
    pub unified: [String; 2],
    pub similarity: f64,
    pub substitution: String,
    pub resolvent: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofSummary {
    pub goal: String,
    pub similarity: f64,
    pub rot_variant: usize,
    pub sst_variant: usize,
    pub steps: Vec<StepSummary>,
    pub answer: BTreeMap<String, String>,
}

impl ProofSummary {
    pub fn from_proof(proof: &Proof, rot_variant: usize, sst_variant: usize) -> Self {
        let n = Notation::plain();
        Self {
            goal: n.literal(&proof.goal),
            similarity: proof.similarity,
            rot_variant,
            sst_variant,
            steps: proof
                .steps
                .iter()
                .map(|s| StepSummary {
                    left: n.clause(&s.left),
                    right: n.clause(&s.right),
                    right_source: s.right_source.to_string(),
                    unified: [n.literal(&s.left_literal), n.literal(&s.right_literal)],
                    similarity: s.similarity,
                    substitution: s.substitution.to_string(),
                    resolvent: n.clause(&s.resolvent),
                })
                .collect(),
            answer: proof.answer.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        }
    }
}

pub fn proof_summary(m: &MatchResult) -> Option<ProofSummary> {
    Some(ProofSummary::from_proof(
        m.proof.as_ref()?,
        m.rot_variant_index?,
        m.sst_variant_index?,
    ))
}

/// One line of a JSONL report: `{"data": ..., "type": kind}`.
#[derive(Clone, Debug, Serialize)]
pub struct ReportLine<'a, T: Serialize> {
    #[serde(rename = "type")]
    pub kind: &'a str,
    pub data: &'a T,
}

impl<'a, T: Serialize> ReportLine<'a, T> {
    pub fn new(kind: &'a str, data: &'a T) -> Self {
        Self { kind, data }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report values serialize")
    }
}
