use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::drift::{monitor_drift, DriftError, DriftReport};
use super::entities::{realign_entities, validate_candidate};
use super::prompt::{entity_names, render_prompt, PromptTemplate};
use super::provider::{Provider, ProviderRequest};
use super::record::{AugmentationRecord, Verdict, RECORD_SCHEMA_VERSION};
use super::sample::{sample_units, SampleError};
use super::AugmentConfig;
use crate::corpus::Corpus;
use crate::textproc::SentenceUnit;

/// Per-stage counts for logs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub sampled: usize,
    pub attempts: usize,
    /// Attempts where the provider returned text.
    pub generated: usize,
    pub accepted: usize,
    /// Rejected attempts by verdict category.
    pub rejected: BTreeMap<&'static str, usize>,
    /// Units whose last attempt ended in a provider error.
    pub provider_failed_units: usize,
}

#[derive(Debug, Clone)]
pub struct AugmentRun {
    pub units: Vec<SentenceUnit>,
    /// Ordered by `(doc_id, unit start, attempt)`.
    pub records: Vec<AugmentationRecord>,
    pub drift: Result<DriftReport, DriftError>,
    pub counts: StageCounts,
}

impl AugmentRun {
    pub fn accepted(&self) -> Vec<AugmentationRecord> {
        self.records
            .iter()
            .filter(|r| r.verdict == Verdict::Accepted)
            .cloned()
            .collect()
    }
}

fn reask(base: &str, problem: &str) -> String {
    format!(
        "{base}\n\nYour previous answer {problem}. Keep every listed medication name verbatim, \
         as many times as it appears in the sentence."
    )
}

/// Ask for one paraphrase of `unit`, re-asking up to `max_retries` times after a rejection.
/// Provider errors end the unit; transport retries happen inside the provider.
fn augment_unit(
    unit: &SentenceUnit,
    template: &PromptTemplate,
    provider: &dyn Provider,
    max_retries: u32,
) -> Vec<AugmentationRecord> {
    let base = render_prompt(template, unit);
    let entities = entity_names(unit);
    let mut prompt = base.clone();
    let mut out = Vec::new();
    for attempt in 1..=max_retries + 1 {
        let req = ProviderRequest {
            prompt: prompt.clone(),
            text: unit.text.clone(),
            entities: entities.clone(),
        };
        let mut rec = AugmentationRecord {
            schema_version: RECORD_SCHEMA_VERSION,
            record_id: format!("{}#{attempt}", unit.unit_id()),
            source_doc_id: unit.doc_id.clone(),
            unit_start: unit.start,
            unit_end: unit.end,
            attempt,
            prompt: prompt.clone(),
            candidate_text: None,
            realigned_mentions: Vec::new(),
            verdict: Verdict::Accepted,
        };
        let candidate = match provider.paraphrase(&req) {
            Ok(c) => c,
            Err(e) => {
                rec.verdict = Verdict::ProviderError {
                    error: e.kind(),
                    message: e.to_string(),
                };
                out.push(rec);
                return out;
            }
        };
        rec.candidate_text = Some(candidate.clone());
        let outcome = validate_candidate(unit, &candidate)
            .map_err(|missing| {
                let problem = format!("dropped {}", missing.join(", "));
                (Verdict::RejectedMissingEntity { missing }, problem)
            })
            .and_then(|()| {
                realign_entities(unit, &candidate).map_err(|f| {
                    let problem = format!("merged or reused `{}`", f.surface);
                    (
                        Verdict::RejectedRealignFailure {
                            mention_id: f.mention_id,
                        },
                        problem,
                    )
                })
            });
        match outcome {
            Ok(spans) => {
                rec.realigned_mentions = spans;
                out.push(rec);
                return out;
            }
            Err((verdict, problem)) => {
                rec.verdict = verdict;
                out.push(rec);
                prompt = reask(&base, &problem);
            }
        }
    }
    out
}

/// Sample, paraphrase, validate and re-align, then measure drift.
///
/// Units are processed by up to `min(jobs, cfg.concurrency)` workers; records are reassembled
/// in unit order, so the result does not depend on the worker count.
pub fn run_augmentation(
    corpus: &Corpus,
    cfg: &AugmentConfig,
    template: &PromptTemplate,
    provider: &dyn Provider,
    jobs: usize,
) -> Result<AugmentRun, SampleError> {
    let units = sample_units(corpus, cfg)?;
    let workers = jobs.min(cfg.concurrency).clamp(1, units.len());
    let slots: Vec<Mutex<Vec<AugmentationRecord>>> =
        units.iter().map(|_| Mutex::new(Vec::new())).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(unit) = units.get(i) else { break };
                let recs = augment_unit(unit, template, provider, cfg.max_retries_per_unit);
                *slots[i].lock().expect("slot lock") = recs;
            });
        }
    });
    let records: Vec<AugmentationRecord> = slots
        .into_iter()
        .flat_map(|m| m.into_inner().expect("slot lock"))
        .collect();

    let mut counts = StageCounts {
        sampled: units.len(),
        attempts: records.len(),
        ..StageCounts::default()
    };
    for r in &records {
        if r.candidate_text.is_some() {
            counts.generated += 1;
        }
        match &r.verdict {
            Verdict::Accepted => counts.accepted += 1,
            Verdict::ProviderError { .. } => counts.provider_failed_units += 1,
            v => *counts.rejected.entry(v.category()).or_default() += 1,
        }
    }
    let drift = monitor_drift(&units, &records, cfg.drift_threshold);
    Ok(AugmentRun {
        units,
        records,
        drift,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::{MockProvider, ProviderError};
    use crate::corpus::{AnnotatedDocument, EventLabel, MentionSpan, Split};

    fn corpus() -> Corpus {
        let mut c = Corpus::new("p");
        for i in 0..12 {
            let doc = AnnotatedDocument::new(
                format!("d{i:02}"),
                "Start Lipitor daily. Continue metformin.",
                vec![
                    MentionSpan::new("T1", 6, 13, "Lipitor", EventLabel::Disposition),
                    MentionSpan::new("T2", 30, 39, "metformin", EventLabel::NoDisposition),
                ],
            )
            .unwrap();
            c.insert(doc, Split::Train);
        }
        c
    }

    fn cfg() -> AugmentConfig {
        let mut cfg = AugmentConfig::new(5);
        cfg.fraction = 0.5;
        cfg
    }

    #[test]
    fn mock_run_accepts_everything_and_is_job_independent() {
        let c = corpus();
        let t = PromptTemplate::builtin();
        let one = run_augmentation(&c, &cfg(), &t, &MockProvider, 1).unwrap();
        let many = run_augmentation(&c, &cfg(), &t, &MockProvider, 8).unwrap();
        assert_eq!(one.records, many.records);
        assert_eq!(one.counts.sampled, 12);
        assert_eq!(one.counts.accepted, 12);
        assert_eq!(one.drift.unwrap().l1_distance, 0.0);
    }

    /// Drops the entity on first try, complies when re-asked.
    struct Forgetful;
    impl Provider for Forgetful {
        fn name(&self) -> &str {
            "forgetful"
        }
        fn paraphrase(&self, req: &ProviderRequest) -> Result<String, ProviderError> {
            if req.prompt.contains("previous answer") {
                MockProvider.paraphrase(req)
            } else {
                Ok("Something else entirely.".into())
            }
        }
    }

    #[test]
    fn rejection_then_reask() {
        let recs = augment_unit(
            &crate::textproc::split_sentences(&corpus().documents["d00"])[0],
            &PromptTemplate::builtin(),
            &Forgetful,
            2,
        );
        assert_eq!(recs.len(), 2);
        assert_eq!(
            recs[0].verdict,
            Verdict::RejectedMissingEntity {
                missing: vec!["Lipitor".into()]
            }
        );
        assert!(recs[1].prompt.contains("dropped Lipitor"));
        assert_eq!(recs[1].verdict, Verdict::Accepted);
        assert_eq!(recs[1].record_id, "d00@0-20#2");
    }

    struct Down;
    impl Provider for Down {
        fn name(&self) -> &str {
            "down"
        }
        fn paraphrase(&self, _: &ProviderRequest) -> Result<String, ProviderError> {
            Err(ProviderError::Timeout)
        }
    }

    #[test]
    fn provider_failure_ends_unit() {
        let run =
            run_augmentation(&corpus(), &cfg(), &PromptTemplate::builtin(), &Down, 3).unwrap();
        assert_eq!(run.records.len(), 12);
        assert_eq!(run.counts.provider_failed_units, 12);
        assert_eq!(run.drift.unwrap_err(), DriftError::EmptyAcceptedSet);
        assert!(run.records.iter().all(|r| r.candidate_text.is_none()));
    }

    struct Stubborn;
    impl Provider for Stubborn {
        fn name(&self) -> &str {
            "stubborn"
        }
        fn paraphrase(&self, _: &ProviderRequest) -> Result<String, ProviderError> {
            Ok("No medication here.".into())
        }
    }

    #[test]
    fn retries_are_bounded() {
        let mut cfg = cfg();
        cfg.max_retries_per_unit = 2;
        let run =
            run_augmentation(&corpus(), &cfg, &PromptTemplate::builtin(), &Stubborn, 2).unwrap();
        assert_eq!(run.records.len(), 36);
        assert_eq!(run.counts.rejected["rejected_missing_entity"], 36);
        assert!(run.accepted().is_empty());
    }
}
