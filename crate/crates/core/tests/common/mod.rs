//! Oracles and fixture helpers shared by the integration tests.
#![allow(dead_code)]

pub mod adjudication;
pub mod golden;
pub mod maxmin;
pub mod merge_oracle;
pub mod textbook;

use std::path::PathBuf;

use reasoner_core::amr::AlignedAmrDocument;
use reasoner_core::harness::{load_corpus, Sample};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn doc(rel: &str) -> AlignedAmrDocument {
    AlignedAmrDocument::load(fixtures().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn corpus() -> Vec<Sample> {
    load_corpus(fixtures().join("corpus")).expect("fixture corpus loads")
}
