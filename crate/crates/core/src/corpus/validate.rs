use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::standoff::check_span;
use super::{AnnotatedDocument, Corpus, StandoffError};
use crate::text::CharIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IssueCategory {
    MalformedLine,
    InvalidMentionId,
    InvalidOffset,
    DiscontinuousSpan,
    UnsupportedAnnotation,
    UnknownLabel,
    EmptySpan,
    OffsetOutOfRange,
    SurfaceMismatch,
    DuplicateMentionId,
    OverlappingMentions,
    DocIdMismatch,
    UnknownSplitDocument,
}

impl From<&StandoffError> for IssueCategory {
    fn from(e: &StandoffError) -> Self {
        match e {
            StandoffError::MalformedLine { .. } => IssueCategory::MalformedLine,
            StandoffError::InvalidMentionId { .. } => IssueCategory::InvalidMentionId,
            StandoffError::InvalidOffset { .. } => IssueCategory::InvalidOffset,
            StandoffError::DiscontinuousSpan { .. } => IssueCategory::DiscontinuousSpan,
            StandoffError::UnsupportedAnnotation { .. } => IssueCategory::UnsupportedAnnotation,
            StandoffError::UnknownLabel { .. } => IssueCategory::UnknownLabel,
            StandoffError::EmptySpan { .. } => IssueCategory::EmptySpan,
            StandoffError::OffsetOutOfRange { .. } => IssueCategory::OffsetOutOfRange,
            StandoffError::SurfaceMismatch { .. } => IssueCategory::SurfaceMismatch,
            StandoffError::DuplicateMentionId { .. } => IssueCategory::DuplicateMentionId,
        }
    }
}

/// Overlapping mentions are legal but suspicious; everything else breaks an invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub doc_id: String,
    pub mention_id: Option<String>,
    pub category: IssueCategory,
    pub severity: Severity,
    pub message: String,
}

impl Issue {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{sev}\t{}\t{}\t{:?}\t{}",
            self.doc_id,
            self.mention_id.as_deref().unwrap_or("-"),
            self.category,
            self.message
        )
    }
}

/// Check every invariant of one document. Issues come out in mention order.
pub fn validate_document(doc: &AnnotatedDocument) -> Vec<Issue> {
    let index = CharIndex::new(&doc.text);
    let mut issues = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for m in &doc.mentions {
        if let Err(e) = check_span(&index, m) {
            issues.push(Issue {
                doc_id: doc.doc_id.clone(),
                mention_id: Some(m.mention_id.clone()),
                category: IssueCategory::from(&e),
                severity: Severity::Error,
                message: e.to_string(),
            });
        }
        let n = seen.entry(m.mention_id.as_str()).or_default();
        *n += 1;
        if *n == 2 {
            issues.push(Issue {
                doc_id: doc.doc_id.clone(),
                mention_id: Some(m.mention_id.clone()),
                category: IssueCategory::DuplicateMentionId,
                severity: Severity::Error,
                message: format!("mention id `{}` used more than once", m.mention_id),
            });
        }
    }
    let mut sorted: Vec<_> = doc.mentions.iter().filter(|m| m.start < m.end).collect();
    sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut reach: Option<&super::MentionSpan> = None;
    for m in sorted {
        if let Some(prev) = reach {
            if m.start < prev.end {
                issues.push(Issue {
                    doc_id: doc.doc_id.clone(),
                    mention_id: Some(m.mention_id.clone()),
                    category: IssueCategory::OverlappingMentions,
                    severity: Severity::Warning,
                    message: format!("overlaps `{}`", prev.mention_id),
                });
            }
        }
        if reach.is_none_or(|p| m.end > p.end) {
            reach = Some(m);
        }
    }
    issues
}

/// Validate a whole corpus. Issues are ordered by document id, then by position.
pub fn validate_corpus(c: &Corpus) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (key, doc) in &c.documents {
        if key != &doc.doc_id {
            issues.push(Issue {
                doc_id: key.clone(),
                mention_id: None,
                category: IssueCategory::DocIdMismatch,
                severity: Severity::Error,
                message: format!("stored under `{key}` but document id is `{}`", doc.doc_id),
            });
        }
        issues.extend(validate_document(doc));
    }
    for key in c.split.keys() {
        if !c.documents.contains_key(key) {
            issues.push(Issue {
                doc_id: key.clone(),
                mention_id: None,
                category: IssueCategory::UnknownSplitDocument,
                severity: Severity::Error,
                message: "split entry without a document".into(),
            });
        }
    }
    issues
}
