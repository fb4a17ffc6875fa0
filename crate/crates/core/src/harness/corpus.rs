use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::amr::AlignedAmrDocument;

use super::HarnessError;

/// A rule of thumb and the situation it was written for.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: String,
    pub rot: AlignedAmrDocument,
    pub sst: AlignedAmrDocument,
}

/// Reads `<id>.rot.json` / `<id>.sst.json` pairs from `dir`, sorted by id.
/// Other files are ignored; an unpaired document is an error.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<Sample>, HarnessError> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| HarnessError::Corpus(format!("{}: {e}", dir.display())))?;
    let mut pairs: BTreeMap<String, (Option<AlignedAmrDocument>, Option<AlignedAmrDocument>)> = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::Corpus(e.to_string()))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let (id, is_rot) = if let Some(id) = name.strip_suffix(".rot.json") {
            (id, true)
        } else if let Some(id) = name.strip_suffix(".sst.json") {
            (id, false)
        } else {
            continue;
        };
        let doc = AlignedAmrDocument::load(&path).map_err(|source| HarnessError::Document {
            id: id.to_string(),
            source,
        })?;
        let slot = pairs.entry(id.to_string()).or_default();
        if is_rot {
            slot.0 = Some(doc);
        } else {
            slot.1 = Some(doc);
        }
    }
    if pairs.is_empty() {
        return Err(HarnessError::Corpus(format!("{} holds no documents", dir.display())));
    }
    pairs
        .into_iter()
        .map(|(id, pair)| match pair {
            (Some(rot), Some(sst)) => Ok(Sample { id, rot, sst }),
            (None, _) => Err(HarnessError::Corpus(format!("{id} has no .rot.json"))),
            (_, None) => Err(HarnessError::Corpus(format!("{id} has no .sst.json"))),
        })
        .collect()
}
