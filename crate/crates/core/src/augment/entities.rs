use std::collections::HashMap;

use crate::corpus::MentionSpan;
use crate::text::normalize_ws_lower;
use crate::textproc::SentenceUnit;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no free occurrence of `{surface}` left for mention {mention_id}")]
pub struct RealignFailure {
    pub mention_id: String,
    pub surface: String,
}

fn fold(c: char) -> impl Iterator<Item = char> {
    c.to_lowercase()
}

/// Match `needle` (already split into words) at char position `at`; returns the end position.
/// Letters compare case-insensitively and each whitespace gap in the needle matches one or more
/// whitespace chars in the haystack.
fn match_at(hay: &[char], at: usize, words: &[Vec<char>]) -> Option<usize> {
    let mut i = at;
    for (w, word) in words.iter().enumerate() {
        if w > 0 {
            let gap = i;
            while i < hay.len() && hay[i].is_whitespace() {
                i += 1;
            }
            if i == gap {
                return None;
            }
        }
        for &c in word {
            let h = *hay.get(i)?;
            if !fold(h).eq(fold(c)) {
                return None;
            }
            i += 1;
        }
    }
    Some(i)
}

fn words(needle: &str) -> Vec<Vec<char>> {
    needle
        .split_whitespace()
        .map(|w| w.chars().collect())
        .collect()
}

/// Non-overlapping occurrences of `needle` in `haystack`, leftmost first, as char offsets.
pub fn find_occurrences(haystack: &str, needle: &str) -> Vec<(usize, usize)> {
    let hay: Vec<char> = haystack.chars().collect();
    let w = words(needle);
    let mut out = Vec::new();
    if w.is_empty() {
        return out;
    }
    let mut i = 0;
    while i < hay.len() {
        match match_at(&hay, i, &w) {
            Some(end) => {
                out.push((i, end));
                i = end;
            }
            None => i += 1,
        }
    }
    out
}

/// Check that every mention surface of the unit occurs in `candidate` at least as often as in
/// the unit. On failure returns the missing surfaces, deduplicated, in source order.
pub fn validate_candidate(unit: &SentenceUnit, candidate: &str) -> Result<(), Vec<String>> {
    let mut needed: Vec<(String, &str, usize)> = Vec::new();
    for m in &unit.mentions {
        let key = normalize_ws_lower(&m.surface);
        match needed.iter_mut().find(|(k, _, _)| *k == key) {
            Some(entry) => entry.2 += 1,
            None => needed.push((key, &m.surface, 1)),
        }
    }
    let missing: Vec<String> = needed
        .into_iter()
        .filter(|(_, surface, n)| find_occurrences(candidate, surface).len() < *n)
        .map(|(_, surface, _)| surface.to_string())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(missing)
    }
}

/// Bind each unit mention, in source order, to the leftmost occurrence of its surface in
/// `candidate` that does not overlap an earlier binding. Spans carry the candidate's casing,
/// the source label and the source mention id.
pub fn realign_entities(
    unit: &SentenceUnit,
    candidate: &str,
) -> Result<Vec<MentionSpan>, RealignFailure> {
    let hay: Vec<char> = candidate.chars().collect();
    let mut cache: HashMap<String, Vec<Vec<char>>> = HashMap::new();
    let mut bound: Vec<(usize, usize)> = Vec::new();
    let mut out = Vec::with_capacity(unit.mentions.len());
    for m in &unit.mentions {
        let w = cache
            .entry(m.surface.clone())
            .or_insert_with(|| words(&m.surface));
        let hit = (0..hay.len()).find_map(|i| {
            let end = match_at(&hay, i, w)?;
            let free = bound.iter().all(|&(s, e)| end <= s || e <= i);
            free.then_some((i, end))
        });
        let Some((start, end)) = hit.filter(|_| !w.is_empty()) else {
            return Err(RealignFailure {
                mention_id: m.mention_id.clone(),
                surface: m.surface.clone(),
            });
        };
        bound.push((start, end));
        let mut span = MentionSpan::new(
            m.mention_id.clone(),
            start,
            end,
            hay[start..end].iter().collect::<String>(),
            m.label,
        );
        span.from_drug_label = m.from_drug_label;
        out.push(span);
    }
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(out)
}
