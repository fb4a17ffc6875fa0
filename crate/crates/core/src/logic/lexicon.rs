use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LogicError, Verdict, VerdictKind};
use crate::amr::strip_frame;

const BUILTIN: &str = include_str!("../../data/verdicts.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub verdict: VerdictKind,
    #[serde(default)]
    pub negated: bool,
}

impl VerdictEntry {
    pub fn to_verdict(self) -> Verdict {
        Verdict {
            kind: self.verdict,
            negated: self.negated,
        }
    }
}

/// Maps verdict concepts to GOOD/BAD. Loaded from TOML so the policy can be
/// edited without touching code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictLexicon {
    #[serde(default)]
    pub modals: BTreeSet<String>,
    #[serde(default)]
    pub verdicts: BTreeMap<String, VerdictEntry>,
}

impl Default for VerdictLexicon {
    fn default() -> Self {
        Self::builtin()
    }
}

impl VerdictLexicon {
    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN).expect("bundled verdict lexicon parses")
    }

    pub fn from_toml(text: &str) -> Result<Self, LogicError> {
        let lex: Self = toml::from_str(text).map_err(|e| LogicError::Lexicon(e.to_string()))?;
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LogicError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| LogicError::Lexicon(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn lookup(&self, concept: &str) -> Option<Verdict> {
        self.verdicts
            .get(strip_frame(concept))
            .map(|e| e.to_verdict())
    }

    pub fn is_modal(&self, concept: &str) -> bool {
        self.modals.contains(strip_frame(concept))
    }

    pub fn insert(&mut self, concept: impl Into<String>, verdict: Verdict) {
        self.verdicts.insert(
            concept.into(),
            VerdictEntry {
                verdict: verdict.kind,
                negated: verdict.negated,
            },
        );
    }
}
