use std::collections::BTreeMap;

use super::record::{AugmentationRecord, Verdict};
use crate::corpus::{AnnotatedDocument, Corpus, Split, StandoffError, AUGMENTED_MARKER};

#[derive(Debug, thiserror::Error)]
pub enum MergeError {
    #[error("record {0} is not accepted")]
    NotAccepted(String),
    #[error("document id {0} already exists")]
    IdCollision(String),
    #[error(
        "record {record_id} comes from {doc_id}, which is not a train document of this corpus"
    )]
    UnknownSource { record_id: String, doc_id: String },
    #[error("record {record_id} does not form a valid document: {source}")]
    InvalidRecord {
        record_id: String,
        source: StandoffError,
    },
}

/// Add each accepted record as a train document `<source>#aug<k>`, numbering per source
/// document in record order. Original documents are left untouched.
pub fn merge_corpus(
    original: &Corpus,
    accepted: &[AugmentationRecord],
) -> Result<Corpus, MergeError> {
    let mut merged = original.clone();
    let mut next_k: BTreeMap<&str, usize> = BTreeMap::new();
    for r in accepted {
        if r.verdict != Verdict::Accepted {
            return Err(MergeError::NotAccepted(r.record_id.clone()));
        }
        let src = r.source_doc_id.as_str();
        if !original.documents.contains_key(src) || original.split_of(src) != Split::Train {
            return Err(MergeError::UnknownSource {
                record_id: r.record_id.clone(),
                doc_id: src.into(),
            });
        }
        let k = next_k.entry(src).or_insert(0);
        *k += 1;
        let doc_id = format!("{src}{AUGMENTED_MARKER}{k}");
        if merged.documents.contains_key(&doc_id) {
            return Err(MergeError::IdCollision(doc_id));
        }
        let text = r.candidate_text.clone().unwrap_or_default();
        let doc = AnnotatedDocument::new(doc_id, text, r.realigned_mentions.clone()).map_err(
            |source| MergeError::InvalidRecord {
                record_id: r.record_id.clone(),
                source,
            },
        )?;
        merged.insert(doc, Split::Train);
    }
    Ok(merged)
}
