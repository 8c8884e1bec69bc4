//! Standoff annotation lines: `T<id>\t<Label> <start> <end>\t<surface>`.
//!
//! Offsets are decimal char offsets into the NFC-normalized document text. Surfaces are
//! written on one line; newlines inside a mention are written as spaces and compared that way.

use std::collections::HashSet;
use std::fmt::Write as _;

use unicode_normalization::UnicodeNormalization;

use super::{AnnotatedDocument, EventLabel, MentionSpan};
use crate::text::CharIndex;

const DRUG_LABEL: &str = "Drug";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StandoffError {
    #[error("line {line}: expected `T<id>\\t<Label> <start> <end>\\t<surface>`")]
    MalformedLine { line: usize },
    #[error("line {line}: annotation id must be `T` followed by letters, digits or `_`")]
    InvalidMentionId { line: usize },
    #[error("line {line}: offsets must be non-negative decimal integers")]
    InvalidOffset { line: usize },
    #[error("line {line}: discontinuous spans are not supported")]
    DiscontinuousSpan { line: usize },
    #[error("line {line}: only text-bound `T` annotations are supported")]
    UnsupportedAnnotation { line: usize },
    #[error("{mention_id}: unknown label `{label}`")]
    UnknownLabel { mention_id: String, label: String },
    #[error("{mention_id}: empty or inverted span")]
    EmptySpan { mention_id: String },
    #[error("{mention_id}: offsets out of range")]
    OffsetOutOfRange { mention_id: String },
    #[error("{mention_id}: annotated surface does not match the document text")]
    SurfaceMismatch { mention_id: String },
    #[error("{mention_id}: duplicate mention id")]
    DuplicateMentionId { mention_id: String },
}

/// One syntactically valid annotation line, before it is checked against any text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawAnnotation {
    /// 1-based line number in the annotation file.
    pub line: usize,
    pub mention_id: String,
    pub label: EventLabel,
    pub from_drug_label: bool,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl RawAnnotation {
    fn into_mention(self, surface: String) -> MentionSpan {
        MentionSpan {
            mention_id: self.mention_id,
            start: self.start,
            end: self.end,
            surface,
            label: self.label,
            from_drug_label: self.from_drug_label,
        }
    }
}

fn valid_mention_id(id: &str) -> bool {
    match id.strip_prefix('T') {
        Some(rest) => {
            !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
        }
        None => false,
    }
}

fn parse_offset(s: &str, line: usize) -> Result<usize, StandoffError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(StandoffError::InvalidOffset { line });
    }
    s.parse().map_err(|_| StandoffError::InvalidOffset { line })
}

fn parse_line(raw: &str, line: usize) -> Result<RawAnnotation, StandoffError> {
    let raw = raw.strip_suffix('\r').unwrap_or(raw);
    let mut fields = raw.splitn(3, '\t');
    let id = fields.next().unwrap_or_default();
    if !id.starts_with('T') {
        return Err(StandoffError::UnsupportedAnnotation { line });
    }
    let (Some(middle), Some(surface)) = (fields.next(), fields.next()) else {
        return Err(StandoffError::MalformedLine { line });
    };
    if !valid_mention_id(id) {
        return Err(StandoffError::InvalidMentionId { line });
    }
    if middle.contains(';') {
        return Err(StandoffError::DiscontinuousSpan { line });
    }
    let parts: Vec<&str> = middle.split(' ').collect();
    let [label, start, end] = parts.as_slice() else {
        return Err(StandoffError::MalformedLine { line });
    };
    if label.is_empty() {
        return Err(StandoffError::MalformedLine { line });
    }
    let start = parse_offset(start, line)?;
    let end = parse_offset(end, line)?;
    let (label, from_drug_label) = if *label == DRUG_LABEL {
        (EventLabel::Undetermined, true)
    } else {
        let parsed = label
            .parse::<EventLabel>()
            .map_err(|_| StandoffError::UnknownLabel {
                mention_id: id.to_string(),
                label: label.to_string(),
            })?;
        (parsed, false)
    };
    Ok(RawAnnotation {
        line,
        mention_id: id.to_string(),
        label,
        from_drug_label,
        start,
        end,
        surface: surface.to_string(),
    })
}

/// Syntactic parse of a whole annotation file. Blank lines are skipped; the first bad line
/// aborts with its error.
pub fn parse_standoff(standoff: &str) -> Result<Vec<RawAnnotation>, StandoffError> {
    standoff
        .split('\n')
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(l, i + 1))
        .collect()
}

/// Syntactic parse that keeps going past bad lines, for validation reports.
pub fn parse_standoff_lenient(standoff: &str) -> (Vec<RawAnnotation>, Vec<StandoffError>) {
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (i, l) in standoff.split('\n').enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        match parse_line(l, i + 1) {
            Ok(a) => ok.push(a),
            Err(e) => errors.push(e),
        }
    }
    (ok, errors)
}

fn single_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

/// Check one mention against the text, in the fixed order empty → range → surface.
pub(crate) fn check_span(index: &CharIndex<'_>, m: &MentionSpan) -> Result<(), StandoffError> {
    if m.start >= m.end || m.surface.is_empty() {
        return Err(StandoffError::EmptySpan {
            mention_id: m.mention_id.clone(),
        });
    }
    let Some(slice) = index.slice(m.start, m.end) else {
        return Err(StandoffError::OffsetOutOfRange {
            mention_id: m.mention_id.clone(),
        });
    };
    if single_line(slice) != single_line(&m.surface) {
        return Err(StandoffError::SurfaceMismatch {
            mention_id: m.mention_id.clone(),
        });
    }
    Ok(())
}

pub(crate) fn check_mentions(text: &str, mentions: &[MentionSpan]) -> Result<(), StandoffError> {
    let index = CharIndex::new(text);
    let mut seen = HashSet::new();
    for m in mentions {
        check_span(&index, m)?;
        if !seen.insert(m.mention_id.as_str()) {
            return Err(StandoffError::DuplicateMentionId {
                mention_id: m.mention_id.clone(),
            });
        }
    }
    Ok(())
}

/// Parse a document from its text and annotation file.
///
/// Text and surfaces are NFC-normalized first. Mention surfaces are taken from the text, so a
/// surface that was written with newlines flattened to spaces still round-trips exactly.
pub fn parse_document(
    doc_id: &str,
    text: &str,
    standoff: &str,
) -> Result<AnnotatedDocument, StandoffError> {
    let text: String = text.nfc().collect();
    let standoff: String = standoff.nfc().collect();
    let raw = parse_standoff(&standoff)?;
    let index = CharIndex::new(&text);
    let mut seen = HashSet::new();
    let mut mentions = Vec::with_capacity(raw.len());
    for a in raw {
        let probe = a.clone().into_mention(a.surface.clone());
        check_span(&index, &probe)?;
        if !seen.insert(a.mention_id.clone()) {
            return Err(StandoffError::DuplicateMentionId {
                mention_id: a.mention_id,
            });
        }
        let surface = index
            .slice(a.start, a.end)
            .expect("span checked")
            .to_string();
        mentions.push(a.into_mention(surface));
    }
    mentions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(AnnotatedDocument {
        doc_id: doc_id.to_string(),
        text,
        mentions,
    })
}

/// Render a document's mentions as annotation lines, sorted by `(start, end, mention_id)`,
/// each terminated by LF.
pub fn serialize_annotations(doc: &AnnotatedDocument) -> String {
    let mut sorted: Vec<&MentionSpan> = doc.mentions.iter().collect();
    sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut out = String::new();
    for m in sorted {
        let label = if m.from_drug_label {
            DRUG_LABEL
        } else {
            m.label.as_str()
        };
        let _ = writeln!(
            out,
            "{}\t{} {} {}\t{}",
            m.mention_id,
            label,
            m.start,
            m.end,
            single_line(&m.surface)
        );
    }
    out
}
