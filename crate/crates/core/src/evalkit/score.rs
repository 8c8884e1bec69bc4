use std::collections::BTreeMap;

use super::matching::{match_spans_with, MatchPolicy};
use super::report::{MacroPrf, MetricsReport, ModeBlock, REPORT_SCHEMA_VERSION};
use super::{EvalError, MatchMode, Prf, TaskMode};
use crate::corpus::{Corpus, EventLabel, MentionSpan, Split};
use crate::textproc::DRUG_TAG_LABEL;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreOptions {
    pub policy: MatchPolicy,
    /// Drop classes with neither gold nor predicted mentions from the macro average.
    pub macro_excludes_absent: bool,
    /// Score only gold documents of this split; predictions for other documents are ignored.
    pub split: Option<Split>,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            policy: MatchPolicy::Maximum,
            macro_excludes_absent: true,
            split: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
}

fn class_of(task: TaskMode, m: &MentionSpan) -> &'static str {
    match task {
        TaskMode::Identification => DRUG_TAG_LABEL,
        TaskMode::EventClassification => m.label.as_str(),
    }
}

fn classes(task: TaskMode) -> Vec<&'static str> {
    match task {
        TaskMode::Identification => vec![DRUG_TAG_LABEL],
        TaskMode::EventClassification => EventLabel::ALL.iter().map(|l| l.as_str()).collect(),
    }
}

fn has_overlap(spans: &[MentionSpan]) -> bool {
    let mut sorted: Vec<&MentionSpan> = spans.iter().collect();
    sorted.sort_by_key(|m| (m.start, m.end));
    let mut reach = 0;
    for (i, m) in sorted.iter().enumerate() {
        if i > 0 && m.start < reach {
            return true;
        }
        reach = reach.max(m.end);
    }
    false
}

fn block(per_class: &BTreeMap<&'static str, Counts>, macro_excludes_absent: bool) -> ModeBlock {
    let (tp, fp, fn_) = per_class
        .values()
        .fold((0, 0, 0), |(a, b, c), k| (a + k.tp, b + k.fp, c + k.fn_));
    let per_class_prf: BTreeMap<String, Prf> = per_class
        .iter()
        .map(|(k, c)| (k.to_string(), Prf::from_counts(c.tp, c.fp, c.fn_)))
        .collect();
    let included: Vec<&Prf> = per_class
        .iter()
        .filter(|(_, c)| !macro_excludes_absent || c.tp + c.fp + c.fn_ > 0)
        .map(|(k, _)| &per_class_prf[*k])
        .collect();
    let n = included.len();
    let mean = |f: fn(&Prf) -> f64| {
        if n == 0 {
            0.0
        } else {
            included.iter().map(|p| f(p)).sum::<f64>() / n as f64
        }
    };
    ModeBlock {
        micro: Prf::from_counts(tp, fp, fn_),
        macro_avg: MacroPrf {
            precision: mean(|p| p.precision),
            recall: mean(|p| p.recall),
            fscore: mean(|p| p.fscore),
            classes: n,
        },
        per_class: per_class_prf,
    }
}

/// Score predictions against a gold corpus with default options.
pub fn score(
    gold: &Corpus,
    predictions: &BTreeMap<String, Vec<MentionSpan>>,
    task: TaskMode,
) -> Result<MetricsReport, EvalError> {
    score_with(gold, predictions, task, &ScoreOptions::default())
}

/// Score predictions against a gold corpus. Gold documents without predictions count as
/// empty predictions. Strict and lenient blocks are computed in one pass; counts are summed
/// per class so the result does not depend on document or mention order.
pub fn score_with(
    gold: &Corpus,
    predictions: &BTreeMap<String, Vec<MentionSpan>>,
    task: TaskMode,
    opts: &ScoreOptions,
) -> Result<MetricsReport, EvalError> {
    for (doc_id, spans) in predictions {
        let Some(doc) = gold.documents.get(doc_id) else {
            return Err(EvalError::UnknownDocument(doc_id.clone()));
        };
        let len = doc.char_len();
        if let Some(bad) = spans.iter().find(|m| m.start >= m.end || m.end > len) {
            return Err(EvalError::InvalidSpan {
                doc_id: doc_id.clone(),
                mention_id: bad.mention_id.clone(),
                start: bad.start,
                end: bad.end,
            });
        }
    }

    let empty = Vec::new();
    let zero: BTreeMap<&'static str, Counts> = classes(task)
        .into_iter()
        .map(|c| (c, Counts::default()))
        .collect();
    let mut strict = zero.clone();
    let mut lenient = zero;
    let mut documents = 0;
    let mut gold_mentions = 0;
    let mut predicted_mentions = 0;
    let mut overlapping = 0;

    for doc in gold.documents.values() {
        if opts.split.is_some_and(|s| gold.split_of(&doc.doc_id) != s) {
            continue;
        }
        let pred = predictions.get(&doc.doc_id).unwrap_or(&empty);
        documents += 1;
        gold_mentions += doc.mentions.len();
        predicted_mentions += pred.len();
        if has_overlap(&doc.mentions) {
            overlapping += 1;
        }
        for (mode, acc) in [
            (MatchMode::Strict, &mut strict),
            (MatchMode::Lenient, &mut lenient),
        ] {
            let r = match_spans_with(&doc.mentions, pred, mode, task, opts.policy);
            for (g, _) in &r.pairs {
                acc.get_mut(class_of(task, g)).expect("known class").tp += 1;
            }
            for g in &r.unmatched_gold {
                acc.get_mut(class_of(task, g)).expect("known class").fn_ += 1;
            }
            for p in &r.unmatched_pred {
                acc.get_mut(class_of(task, p)).expect("known class").fp += 1;
            }
        }
    }

    Ok(MetricsReport {
        schema_version: REPORT_SCHEMA_VERSION,
        task,
        match_policy: opts.policy,
        macro_excludes_absent: opts.macro_excludes_absent,
        documents,
        gold_mentions,
        predicted_mentions,
        documents_with_overlapping_gold: overlapping,
        strict: block(&strict, opts.macro_excludes_absent),
        lenient: block(&lenient, opts.macro_excludes_absent),
    })
}
