//! Span-annotated documents and the standoff files and corpus directories that hold them.

mod io;
mod standoff;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use io::{
    load_corpus, load_corpus_unchecked, load_predictions, parse_manifest, read_text_file,
    read_texts, write_corpus, CorpusError, ManifestError, MANIFEST_FILE,
};
pub use standoff::{
    parse_document, parse_standoff, parse_standoff_lenient, serialize_annotations, RawAnnotation,
    StandoffError,
};
pub use validate::{validate_corpus, validate_document, Issue, IssueCategory, Severity};

/// Medication event label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventLabel {
    Disposition,
    NoDisposition,
    Undetermined,
}

impl EventLabel {
    pub const ALL: [EventLabel; 3] = [
        EventLabel::Disposition,
        EventLabel::NoDisposition,
        EventLabel::Undetermined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventLabel::Disposition => "Disposition",
            EventLabel::NoDisposition => "NoDisposition",
            EventLabel::Undetermined => "Undetermined",
        }
    }
}

impl fmt::Display for EventLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown event label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for EventLabel {
    type Err = UnknownLabel;

    /// Accepts exactly the three event labels. The identification-only `Drug` label is a
    /// standoff-format concern and is handled by the standoff parser.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Disposition" => Ok(EventLabel::Disposition),
            "NoDisposition" => Ok(EventLabel::NoDisposition),
            "Undetermined" => Ok(EventLabel::Undetermined),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

/// One medication mention: `[start, end)` char offsets into its document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MentionSpan {
    pub mention_id: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub label: EventLabel,
    /// Set when the annotation was written with the identification-only `Drug` label; the
    /// mention then carries `Undetermined` and serializes back as `Drug`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub from_drug_label: bool,
}

impl MentionSpan {
    pub fn new(
        mention_id: impl Into<String>,
        start: usize,
        end: usize,
        surface: impl Into<String>,
        label: EventLabel,
    ) -> Self {
        MentionSpan {
            mention_id: mention_id.into(),
            start,
            end,
            surface: surface.into(),
            label,
            from_drug_label: false,
        }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn overlaps(&self, other: &MentionSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Ordering key used everywhere mentions are listed.
    pub(crate) fn sort_key(&self) -> (usize, usize, &str) {
        (self.start, self.end, self.mention_id.as_str())
    }
}

/// Raw text plus its medication mentions.
///
/// Fields are public so that corpora can be assembled programmatically; use
/// [`validate_document`] or construct through [`parse_document`] to get invariant checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub text: String,
    pub mentions: Vec<MentionSpan>,
}

impl AnnotatedDocument {
    /// Build a document, checking every invariant and sorting mentions by
    /// `(start, end, mention_id)`.
    pub fn new(
        doc_id: impl Into<String>,
        text: impl Into<String>,
        mut mentions: Vec<MentionSpan>,
    ) -> Result<Self, StandoffError> {
        let doc = AnnotatedDocument {
            doc_id: doc_id.into(),
            text: text.into(),
            mentions: Vec::new(),
        };
        standoff::check_mentions(&doc.text, &mentions)?;
        mentions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Ok(AnnotatedDocument { mentions, ..doc })
    }

    pub fn char_len(&self) -> usize {
        crate::text::char_len(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// Named document collection with split membership. Documents absent from `split` are
/// treated as training documents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub name: String,
    pub documents: BTreeMap<String, AnnotatedDocument>,
    pub split: BTreeMap<String, Split>,
}

/// Marker separating a source document id from the augmentation counter.
pub const AUGMENTED_MARKER: &str = "#aug";

impl Corpus {
    pub fn new(name: impl Into<String>) -> Self {
        Corpus {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Insert a document with an explicit split, replacing any previous entry.
    pub fn insert(&mut self, doc: AnnotatedDocument, split: Split) {
        self.split.insert(doc.doc_id.clone(), split);
        self.documents.insert(doc.doc_id.clone(), doc);
    }

    pub fn split_of(&self, doc_id: &str) -> Split {
        self.split.get(doc_id).copied().unwrap_or(Split::Train)
    }

    /// Documents of one split in doc-id order.
    pub fn docs_in(&self, split: Split) -> impl Iterator<Item = &AnnotatedDocument> + '_ {
        self.documents
            .values()
            .filter(move |d| self.split_of(&d.doc_id) == split)
    }

    pub fn is_augmented(doc_id: &str) -> bool {
        match doc_id.rfind(AUGMENTED_MARKER) {
            Some(pos) => {
                let tail = &doc_id[pos + AUGMENTED_MARKER.len()..];
                !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit())
            }
            None => false,
        }
    }

    pub fn augmented_count(&self) -> usize {
        self.documents
            .keys()
            .filter(|k| Self::is_augmented(k))
            .count()
    }

    pub fn mention_count(&self) -> usize {
        self.documents.values().map(|d| d.mentions.len()).sum()
    }
}
