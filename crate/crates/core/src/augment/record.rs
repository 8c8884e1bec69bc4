use serde::{Deserialize, Serialize};

use super::provider::ProviderErrorKind;
use crate::corpus::MentionSpan;

pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// Outcome of one provider attempt. Exactly one category per record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    RejectedMissingEntity {
        missing: Vec<String>,
    },
    RejectedRealignFailure {
        mention_id: String,
    },
    ProviderError {
        error: ProviderErrorKind,
        message: String,
    },
}

impl Verdict {
    /// Short category name used in logs and stage counts.
    pub fn category(&self) -> &'static str {
        match self {
            Verdict::Accepted => "accepted",
            Verdict::RejectedMissingEntity { .. } => "rejected_missing_entity",
            Verdict::RejectedRealignFailure { .. } => "rejected_realign_failure",
            Verdict::ProviderError { .. } => "provider_error",
        }
    }
}

/// One line of the augmentation log. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentationRecord {
    pub schema_version: u32,
    /// `<doc_id>@<start>-<end>#<attempt>`.
    pub record_id: String,
    pub source_doc_id: String,
    pub unit_start: usize,
    pub unit_end: usize,
    /// 1-based attempt number within the unit.
    pub attempt: u32,
    pub prompt: String,
    /// Provider output verbatim; `None` when the provider call failed.
    pub candidate_text: Option<String>,
    pub realigned_mentions: Vec<MentionSpan>,
    pub verdict: Verdict,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("record line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("record line {line}: unsupported schema version {found}")]
    SchemaVersion { line: usize, found: u32 },
}

/// Serialize records as JSON lines, each terminated by LF.
pub fn write_records(records: &[AugmentationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parse a JSON-lines record log; blank lines are skipped.
pub fn read_records(s: &str) -> Result<Vec<AugmentationRecord>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in s.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let r: AugmentationRecord =
            serde_json::from_str(line).map_err(|source| RecordError::Json {
                line: line_no,
                source,
            })?;
        if r.schema_version != RECORD_SCHEMA_VERSION {
            return Err(RecordError::SchemaVersion {
                line: line_no,
                found: r.schema_version,
            });
        }
        out.push(r);
    }
    Ok(out)
}
