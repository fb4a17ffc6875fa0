use serde::{Deserialize, Serialize};

use crate::amr::AlignedAmrDocument;
use crate::logic::amr_to_formula;
use crate::merge::{enumerate_merge_trees, MergeConfig};

use super::{HarnessError, Sample};

/// Mean, median, and population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub stdev: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        } else {
            sorted[mid]
        };
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Summary {
            mean,
            median,
            stdev: var.sqrt(),
        })
    }
}

/// Raw per-document numbers behind the summaries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocNumbers {
    pub id: String,
    pub instance_nodes: usize,
    /// Longest root-to-node edge count.
    pub depth: usize,
    /// Literals in the unmerged formula.
    pub logic_terms: usize,
    /// Distinct trees after merging, the original included.
    pub merge_trees: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocStats {
    pub count: usize,
    pub instance_nodes: Summary,
    pub depth: Summary,
    pub logic_terms: Summary,
    pub merge_trees: Summary,
    pub documents: Vec<DocNumbers>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub rot: DocStats,
    pub sst: DocStats,
}

fn numbers(doc: &AlignedAmrDocument, merge: &MergeConfig) -> Result<DocNumbers, HarnessError> {
    let tree = doc.to_tree().map_err(|source| HarnessError::Document {
        id: doc.id.clone(),
        source,
    })?;
    let formula = amr_to_formula(&tree).map_err(|source| HarnessError::Logic {
        id: doc.id.clone(),
        source,
    })?;
    let set = enumerate_merge_trees(&tree, merge).map_err(|source| HarnessError::Merge {
        id: doc.id.clone(),
        source,
    })?;
    Ok(DocNumbers {
        id: doc.id.clone(),
        instance_nodes: tree.instance_count(),
        depth: tree.max_depth(),
        logic_terms: formula.literals().len(),
        merge_trees: set.len(),
    })
}

fn doc_stats(docs: Vec<DocNumbers>) -> DocStats {
    let col = |f: fn(&DocNumbers) -> usize| -> Summary {
        let v: Vec<f64> = docs.iter().map(|d| f(d) as f64).collect();
        Summary::of(&v).expect("non-empty")
    };
    DocStats {
        count: docs.len(),
        instance_nodes: col(|d| d.instance_nodes),
        depth: col(|d| d.depth),
        logic_terms: col(|d| d.logic_terms),
        merge_trees: col(|d| d.merge_trees),
        documents: docs,
    }
}

/// Tree-size statistics for the rules and the situations separately.
pub fn dataset_stats(samples: &[Sample], merge: &MergeConfig) -> Result<DatasetStats, HarnessError> {
    if samples.is_empty() {
        return Err(HarnessError::Config("dataset is empty".into()));
    }
    let rot = samples.iter().map(|s| numbers(&s.rot, merge)).collect::<Result<Vec<_>, _>>()?;
    let sst = samples.iter().map(|s| numbers(&s.sst, merge)).collect::<Result<Vec<_>, _>>()?;
    Ok(DatasetStats {
        rot: doc_stats(rot),
        sst: doc_stats(sst),
    })
}
