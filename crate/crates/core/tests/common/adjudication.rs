//! The hand-adjudicated expectations for the fixture corpus.

use std::collections::BTreeSet;

use reasoner_core::harness::RunConfig;
use reasoner_core::prover::ProverConfig;
use serde::Deserialize;

use super::fixtures;

#[derive(Debug, Deserialize)]
pub struct Pair {
    pub rot: String,
    pub sst: String,
}

#[derive(Debug, Deserialize)]
pub struct Expected {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Deserialize)]
pub struct SampleOutcome {
    pub id: String,
    pub outcome: String,
    pub collapsability_rot: f64,
    pub collapsability_sst: f64,
}

#[derive(Debug, Deserialize)]
pub struct Adjudication {
    pub seed: u64,
    pub threshold: f64,
    pub buckets: Vec<f64>,
    pub cross_matches: Vec<Pair>,
    pub negative_pairing: Vec<String>,
    pub expected: Expected,
    pub sample: Vec<SampleOutcome>,
}

impl Adjudication {
    pub fn load() -> Self {
        toml::from_str(&std::fs::read_to_string(fixtures().join("adjudication.toml")).unwrap()).unwrap()
    }

    pub fn config(&self) -> RunConfig {
        RunConfig {
            prover: ProverConfig::with_threshold(self.threshold),
            rng_seed: self.seed,
            ..RunConfig::default()
        }
    }

    /// Every (rule id, situation id) pair expected to match.
    pub fn matching_pairs(&self) -> BTreeSet<(String, String)> {
        self.sample
            .iter()
            .filter(|s| s.outcome == "TP")
            .map(|s| (s.id.clone(), s.id.clone()))
            .chain(self.cross_matches.iter().map(|p| (p.rot.clone(), p.sst.clone())))
            .collect()
    }
}
