use std::collections::BTreeMap;

use super::{Gazetteer, RuleSet};
use crate::corpus::{Corpus, EventLabel, MentionSpan};
use crate::text::{normalize_ws_lower, CharIndex};
use crate::textproc::tokenize;

/// Tag medication mentions in raw text.
///
/// Scans tokens left to right; at each position the longest token run whose normalized
/// surface is a gazetteer entry becomes a mention and scanning resumes after it. The label is
/// taken from the nearest trigger among the `window` tokens to the left.
pub fn tag(text: &str, gazetteer: &Gazetteer, rules: &RuleSet) -> Vec<MentionSpan> {
    let tokens = tokenize(text);
    let lowered: Vec<String> = tokens.iter().map(|t| t.surface.to_lowercase()).collect();
    let index = CharIndex::new(text);
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = gazetteer.max_tokens().min(tokens.len() - i);
        let hit = (1..=longest).rev().find(|&n| {
            let surface = index
                .slice(tokens[i].start, tokens[i + n - 1].end)
                .expect("token offsets");
            gazetteer.contains(&normalize_ws_lower(surface))
        });
        let Some(n) = hit else {
            i += 1;
            continue;
        };
        let (start, end) = (tokens[i].start, tokens[i + n - 1].end);
        let label = lowered[i.saturating_sub(rules.window)..i]
            .iter()
            .rev()
            .find_map(|w| rules.label_for(w))
            .unwrap_or(EventLabel::Undetermined);
        out.push(MentionSpan::new(
            format!("T{}", out.len() + 1),
            start,
            end,
            index.slice(start, end).expect("token offsets"),
            label,
        ));
        i += n;
    }
    out
}

/// Tag every document of a corpus, keyed by doc id.
pub fn tag_corpus(
    corpus: &Corpus,
    gazetteer: &Gazetteer,
    rules: &RuleSet,
) -> BTreeMap<String, Vec<MentionSpan>> {
    corpus
        .documents
        .values()
        .map(|d| (d.doc_id.clone(), tag(&d.text, gazetteer, rules)))
        .collect()
}
