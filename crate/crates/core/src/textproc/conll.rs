//! CoNLL-style token export: one `<surface>\t<start>\t<end>\t<tag>` line per token with
//! document-level char offsets, a `# doc_id = <id>` comment opening each unit, and a blank
//! line closing it.

use std::fmt::Write as _;

use super::bio::{encode_bio, BioTag, LabelScheme, TaggedSequence};
use super::sentences::split_sentences;
use super::tokenize::Token;
use crate::corpus::{Corpus, Split};

const DOC_ID_COMMENT: &str = "# doc_id = ";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConllError {
    #[error("line {line}: expected `<surface>\\t<start>\\t<end>\\t<tag>`")]
    MalformedLine { line: usize },
    #[error("line {line}: offsets must be decimal integers with start < end")]
    InvalidOffset { line: usize },
    #[error("line {line}: {tag}")]
    InvalidTag { line: usize, tag: String },
    #[error("line {line}: token overlaps or precedes the previous token")]
    UnorderedTokens { line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConllRow {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub tag: BioTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConllBlock {
    pub doc_id: Option<String>,
    pub rows: Vec<ConllRow>,
}

impl ConllBlock {
    pub fn to_sequence(&self) -> TaggedSequence {
        TaggedSequence {
            doc_id: self.doc_id.clone().unwrap_or_default(),
            tokens: self
                .rows
                .iter()
                .map(|r| Token {
                    surface: r.surface.clone(),
                    start: r.start,
                    end: r.end,
                })
                .collect(),
            tags: self.rows.iter().map(|r| r.tag.clone()).collect(),
        }
    }
}

/// Write sequences, shifting every token by the paired base offset (the unit's start in its
/// document).
pub fn write_conll<'a>(blocks: impl IntoIterator<Item = (&'a TaggedSequence, usize)>) -> String {
    let mut out = String::new();
    for (seq, base) in blocks {
        let _ = writeln!(out, "{DOC_ID_COMMENT}{}", seq.doc_id);
        for (t, tag) in seq.tokens.iter().zip(&seq.tags) {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                t.surface,
                t.start + base,
                t.end + base,
                tag
            );
        }
        out.push('\n');
    }
    out
}

fn parse_num(s: &str, line: usize) -> Result<usize, ConllError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ConllError::InvalidOffset { line });
    }
    s.parse().map_err(|_| ConllError::InvalidOffset { line })
}

fn close(current: &mut ConllBlock, blocks: &mut Vec<ConllBlock>) {
    if !current.rows.is_empty() || current.doc_id.is_some() {
        blocks.push(std::mem::take(current));
    }
}

pub fn parse_conll(src: &str) -> Result<Vec<ConllBlock>, ConllError> {
    let mut blocks = Vec::new();
    let mut current = ConllBlock::default();
    let mut last_end: Option<usize> = None;
    for (i, raw) in src.split('\n').enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            close(&mut current, &mut blocks);
            last_end = None;
            continue;
        }
        if raw.starts_with('#') {
            if let Some(id) = raw.strip_prefix(DOC_ID_COMMENT) {
                if !current.rows.is_empty() {
                    close(&mut current, &mut blocks);
                    last_end = None;
                }
                current.doc_id = Some(id.to_string());
            }
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let [surface, start, end, tag] = fields.as_slice() else {
            return Err(ConllError::MalformedLine { line });
        };
        if surface.is_empty() {
            return Err(ConllError::MalformedLine { line });
        }
        let start = parse_num(start, line)?;
        let end = parse_num(end, line)?;
        if start >= end {
            return Err(ConllError::InvalidOffset { line });
        }
        if last_end.is_some_and(|prev| start < prev) {
            return Err(ConllError::UnorderedTokens { line });
        }
        let tag = tag.parse::<BioTag>().map_err(|e| ConllError::InvalidTag {
            line,
            tag: e.to_string(),
        })?;
        last_end = Some(end);
        current.rows.push(ConllRow {
            surface: surface.to_string(),
            start,
            end,
            tag,
        });
    }
    close(&mut current, &mut blocks);
    Ok(blocks)
}

/// Export statistics alongside the CoNLL text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExportStats {
    pub units: usize,
    pub snapped: usize,
    pub dropped: usize,
}

/// Sentence-split and BIO-encode every document of a split (or all documents), in doc-id
/// order.
pub fn export_conll(
    corpus: &Corpus,
    scheme: LabelScheme,
    split: Option<Split>,
) -> (String, ExportStats) {
    let mut stats = ExportStats::default();
    let mut encoded = Vec::new();
    for doc in corpus.documents.values() {
        if split.is_some_and(|s| corpus.split_of(&doc.doc_id) != s) {
            continue;
        }
        for unit in split_sentences(doc) {
            let enc = encode_bio(&unit, scheme);
            stats.units += 1;
            stats.snapped += enc.snapped;
            stats.dropped += enc.dropped;
            encoded.push((enc.sequence, unit.start));
        }
    }
    (write_conll(encoded.iter().map(|(s, b)| (s, *b))), stats)
}
