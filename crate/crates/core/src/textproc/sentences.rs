use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedDocument, MentionSpan};

/// A sentence-sized slice of a document with its mentions re-based to slice-local offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceUnit {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub mentions: Vec<MentionSpan>,
}

impl SentenceUnit {
    /// Stable identifier `<doc_id>@<start>-<end>`.
    pub fn unit_id(&self) -> String {
        format!("{}@{}-{}", self.doc_id, self.start, self.end)
    }
}

/// Candidate boundary: the gap `[end_of_sentence, start_of_next)`.
#[derive(Debug, Clone, Copy)]
struct Cut {
    gap_start: usize,
    gap_end: usize,
}

fn opens_sentence(c: char) -> bool {
    c.is_uppercase() || c.is_numeric()
}

fn candidate_cuts(chars: &[char]) -> Vec<Cut> {
    let n = chars.len();
    let mut cuts: Vec<Cut> = Vec::new();
    for (i, &c) in chars.iter().enumerate() {
        let gap_start = match c {
            '.' | '!' | '?' => i + 1,
            '\n' => i,
            _ => continue,
        };
        let mut j = i + 1;
        while j < n && chars[j].is_whitespace() {
            j += 1;
        }
        // terminal punctuation needs at least one whitespace char before the next sentence
        if c != '\n' && j == i + 1 {
            continue;
        }
        if j >= n || !opens_sentence(chars[j]) {
            continue;
        }
        if cuts.last().is_some_and(|prev| gap_start < prev.gap_end) {
            continue;
        }
        cuts.push(Cut {
            gap_start,
            gap_end: j,
        });
    }
    cuts
}

/// Split a document into sentence units.
///
/// A boundary follows `.`, `!`, `?` or a newline when the next non-whitespace char is an
/// uppercase letter or digit. Boundaries whose gap touches a mention are dropped, so no mention
/// ever straddles two units. Units are trimmed of surrounding whitespace unless a mention
/// covers it; the text between consecutive units is whitespace only.
pub fn split_sentences(doc: &AnnotatedDocument) -> Vec<SentenceUnit> {
    let chars: Vec<char> = doc.text.chars().collect();
    let n = chars.len();
    let cuts: Vec<Cut> = candidate_cuts(&chars)
        .into_iter()
        .filter(|c| {
            !doc.mentions
                .iter()
                .any(|m| m.start < c.gap_end && m.end > c.gap_start)
        })
        .collect();

    let mut segments = Vec::with_capacity(cuts.len() + 1);
    let mut seg_start = 0;
    for c in &cuts {
        segments.push((seg_start, c.gap_start));
        seg_start = c.gap_end;
    }
    segments.push((seg_start, n));

    let mut units = Vec::new();
    for (seg_start, seg_end) in segments {
        let inside: Vec<&MentionSpan> = doc
            .mentions
            .iter()
            .filter(|m| m.start < seg_end && m.end > seg_start)
            .collect();
        let mut start = seg_start;
        while start < seg_end && chars[start].is_whitespace() {
            start += 1;
        }
        let mut end = seg_end;
        while end > start && chars[end - 1].is_whitespace() {
            end -= 1;
        }
        for m in &inside {
            start = start.min(m.start);
            end = end.max(m.end);
        }
        if start >= end {
            continue;
        }
        let mut mentions: Vec<MentionSpan> = inside
            .into_iter()
            .map(|m| MentionSpan {
                start: m.start - start,
                end: m.end - start,
                ..m.clone()
            })
            .collect();
        mentions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        units.push(SentenceUnit {
            doc_id: doc.doc_id.clone(),
            start,
            end,
            text: chars[start..end].iter().collect(),
            mentions,
        });
    }
    units
}
