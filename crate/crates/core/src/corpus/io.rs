//! Corpus directories: paired `<id>.txt` / `<id>.ann` files plus an optional `splits.tsv`
//! manifest of `<doc_id>\t<train|dev|test>` lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use unicode_normalization::UnicodeNormalization;

use super::standoff::{parse_standoff_lenient, serialize_annotations};
use super::validate::{Issue, IssueCategory, Severity};
use super::{parse_document, AnnotatedDocument, Corpus, MentionSpan, Split, StandoffError};
use crate::fsutil::write_atomic;

pub const MANIFEST_FILE: &str = "splits.tsv";

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("manifest line {line}: expected `<doc_id>\\t<train|dev|test>`")]
    MalformedLine { line: usize },
    #[error("manifest line {line}: unknown split `{split}`")]
    UnknownSplit { line: usize, split: String },
    #[error("manifest line {line}: `{doc_id}` listed twice")]
    DuplicateEntry { line: usize, doc_id: String },
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("document `{0}` has a .txt without .ann or an .ann without .txt")]
    MissingPair(String),
    #[error("document `{doc_id}`: {source}")]
    Parse {
        doc_id: String,
        #[source]
        source: StandoffError,
    },
    #[error("{MANIFEST_FILE}: {0}")]
    Manifest(#[from] ManifestError),
    #[error("{MANIFEST_FILE} names `{0}` but no such document exists")]
    ManifestUnknownDocument(String),
    #[error("prediction file `{0}.ann` has no matching gold document")]
    UnknownPrediction(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parse a split manifest. Blank lines are ignored.
pub fn parse_manifest(src: &str) -> Result<Vec<(String, Split)>, ManifestError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, raw) in src.split('\n').enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let Some((doc_id, split)) = raw.split_once('\t') else {
            return Err(ManifestError::MalformedLine { line });
        };
        if doc_id.is_empty() || split.contains('\t') {
            return Err(ManifestError::MalformedLine { line });
        }
        let split = split
            .trim()
            .parse::<Split>()
            .map_err(|_| ManifestError::UnknownSplit {
                line,
                split: split.to_string(),
            })?;
        if !seen.insert(doc_id.to_string()) {
            return Err(ManifestError::DuplicateEntry {
                line,
                doc_id: doc_id.to_string(),
            });
        }
        out.push((doc_id.to_string(), split));
    }
    Ok(out)
}

/// Read a UTF-8 text file, NFC-normalized.
pub fn read_text_file(path: &Path) -> Result<String, CorpusError> {
    let raw = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(raw.nfc().collect())
}

struct Listing {
    ids: BTreeSet<String>,
    manifest: Option<String>,
}

/// Stems of the `.txt` and `.ann` files directly under `root`.
fn scan(root: &Path) -> Result<(BTreeSet<String>, BTreeSet<String>), CorpusError> {
    let mut txt = BTreeSet::new();
    let mut ann = BTreeSet::new();
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let (Some(stem), Some(ext)) = (
            path.file_stem().and_then(|s| s.to_str()),
            path.extension().and_then(|s| s.to_str()),
        ) else {
            continue;
        };
        match ext {
            "txt" => txt.insert(stem.to_string()),
            "ann" => ann.insert(stem.to_string()),
            _ => false,
        };
    }
    Ok((txt, ann))
}

fn list_pairs(root: &Path) -> Result<Listing, CorpusError> {
    let (txt, ann) = scan(root)?;
    if let Some(id) = txt.symmetric_difference(&ann).next() {
        return Err(CorpusError::MissingPair(id.clone()));
    }
    let manifest_path = root.join(MANIFEST_FILE);
    let manifest = if manifest_path.is_file() {
        Some(fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?)
    } else {
        None
    };
    Ok(Listing { ids: txt, manifest })
}

fn corpus_name(root: &Path) -> String {
    root.file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("corpus")
        .to_string()
}

fn apply_manifest(corpus: &mut Corpus, manifest: Option<&str>) -> Result<(), CorpusError> {
    if let Some(src) = manifest {
        for (doc_id, split) in parse_manifest(src)? {
            if !corpus.documents.contains_key(&doc_id) {
                return Err(CorpusError::ManifestUnknownDocument(doc_id));
            }
            corpus.split.insert(doc_id, split);
        }
    }
    Ok(())
}

/// Load a corpus directory. Every document must parse cleanly; documents missing from the
/// manifest are assigned to train.
pub fn load_corpus(root: &Path) -> Result<Corpus, CorpusError> {
    let listing = list_pairs(root)?;
    let mut corpus = Corpus::new(corpus_name(root));
    for id in &listing.ids {
        let text = read_text_file(&root.join(format!("{id}.txt")))?;
        let ann_path = root.join(format!("{id}.ann"));
        let ann = fs::read_to_string(&ann_path).map_err(io_err(&ann_path))?;
        let doc = parse_document(id, &text, &ann).map_err(|source| CorpusError::Parse {
            doc_id: id.clone(),
            source,
        })?;
        corpus.documents.insert(id.clone(), doc);
    }
    apply_manifest(&mut corpus, listing.manifest.as_deref())?;
    for id in listing.ids {
        corpus.split.entry(id).or_insert(Split::Train);
    }
    Ok(corpus)
}

/// Load a corpus without rejecting invalid annotations. Mentions keep the surface written in
/// the annotation file, so [`super::validate_corpus`] can report mismatches; lines that do
/// not parse at all are returned as issues. Missing pairs and I/O failures are still errors.
pub fn load_corpus_unchecked(root: &Path) -> Result<(Corpus, Vec<Issue>), CorpusError> {
    let listing = list_pairs(root)?;
    let mut corpus = Corpus::new(corpus_name(root));
    let mut issues = Vec::new();
    for id in &listing.ids {
        let text = read_text_file(&root.join(format!("{id}.txt")))?;
        let ann_path = root.join(format!("{id}.ann"));
        let ann: String = fs::read_to_string(&ann_path)
            .map_err(io_err(&ann_path))?
            .nfc()
            .collect();
        let (raw, errors) = parse_standoff_lenient(&ann);
        issues.extend(errors.into_iter().map(|e| Issue {
            doc_id: id.clone(),
            mention_id: None,
            category: IssueCategory::from(&e),
            severity: Severity::Error,
            message: e.to_string(),
        }));
        let mut mentions: Vec<MentionSpan> = raw
            .into_iter()
            .map(|a| MentionSpan {
                mention_id: a.mention_id,
                start: a.start,
                end: a.end,
                surface: a.surface,
                label: a.label,
                from_drug_label: a.from_drug_label,
            })
            .collect();
        mentions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        corpus.documents.insert(
            id.clone(),
            AnnotatedDocument {
                doc_id: id.clone(),
                text,
                mentions,
            },
        );
    }
    apply_manifest(&mut corpus, listing.manifest.as_deref())?;
    for id in listing.ids {
        corpus.split.entry(id).or_insert(Split::Train);
    }
    Ok((corpus, issues))
}

/// Read every `<id>.txt` under `root` (annotations, if any, are ignored).
pub fn read_texts(root: &Path) -> Result<BTreeMap<String, String>, CorpusError> {
    let (txt, _) = scan(root)?;
    txt.into_iter()
        .map(|id| {
            let text = read_text_file(&root.join(format!("{id}.txt")))?;
            Ok((id, text))
        })
        .collect()
}

/// Read prediction files: every `<id>.ann` under `root` is parsed against the text of gold
/// document `id`. Gold documents without a file are absent from the result.
pub fn load_predictions(
    root: &Path,
    gold: &Corpus,
) -> Result<BTreeMap<String, Vec<MentionSpan>>, CorpusError> {
    let (_, ann) = scan(root)?;
    let mut out = BTreeMap::new();
    for id in ann {
        let Some(doc) = gold.documents.get(&id) else {
            return Err(CorpusError::UnknownPrediction(id));
        };
        let path = root.join(format!("{id}.ann"));
        let src = fs::read_to_string(&path).map_err(io_err(&path))?;
        let parsed = parse_document(&id, &doc.text, &src).map_err(|source| CorpusError::Parse {
            doc_id: id.clone(),
            source,
        })?;
        out.insert(id, parsed.mentions);
    }
    Ok(out)
}

/// Write every document as a `.txt`/`.ann` pair plus a full manifest. Each file is written
/// atomically.
pub fn write_corpus(corpus: &Corpus, root: &Path) -> Result<(), CorpusError> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    let mut manifest = String::new();
    let splits: BTreeMap<&str, Split> = corpus
        .documents
        .keys()
        .map(|k| (k.as_str(), corpus.split_of(k)))
        .collect();
    for (id, doc) in &corpus.documents {
        let txt = root.join(format!("{id}.txt"));
        write_atomic(&txt, doc.text.as_bytes()).map_err(io_err(&txt))?;
        let ann = root.join(format!("{id}.ann"));
        write_atomic(&ann, serialize_annotations(doc).as_bytes()).map_err(io_err(&ann))?;
    }
    for (id, split) in splits {
        manifest.push_str(id);
        manifest.push('\t');
        manifest.push_str(split.as_str());
        manifest.push('\n');
    }
    let path = root.join(MANIFEST_FILE);
    write_atomic(&path, manifest.as_bytes()).map_err(io_err(&path))?;
    Ok(())
}
