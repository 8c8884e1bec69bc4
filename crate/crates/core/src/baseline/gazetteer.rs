use std::collections::BTreeSet;

use super::BaselineError;
use crate::corpus::{Corpus, Split};
use crate::text::normalize_ws_lower;
use crate::textproc::tokenize;

/// Lowercased, whitespace-normalized medication surfaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gazetteer {
    entries: BTreeSet<String>,
    pub built_from: String,
    max_tokens: usize,
}

impl Gazetteer {
    pub fn from_entries<I, S>(built_from: impl Into<String>, entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries: BTreeSet<String> = entries
            .into_iter()
            .map(|s| normalize_ws_lower(s.as_ref()))
            .filter(|s| !s.is_empty())
            .collect();
        let max_tokens = entries.iter().map(|e| tokenize(e).len()).max().unwrap_or(0);
        Gazetteer {
            entries,
            built_from: built_from.into(),
            max_tokens,
        }
    }

    pub fn contains(&self, normalized: &str) -> bool {
        self.entries.contains(normalized)
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest entry, in tokens.
    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }
}

/// Distinct mention surfaces of the training split only.
pub fn build_gazetteer(corpus: &Corpus) -> Result<Gazetteer, BaselineError> {
    let surfaces: Vec<&str> = corpus
        .docs_in(Split::Train)
        .flat_map(|d| d.mentions.iter().map(|m| m.surface.as_str()))
        .collect();
    let g = Gazetteer::from_entries(corpus.name.clone(), surfaces);
    if g.is_empty() {
        return Err(BaselineError::EmptyTrainingSet);
    }
    Ok(g)
}
