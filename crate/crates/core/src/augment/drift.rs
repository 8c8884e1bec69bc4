use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::record::{AugmentationRecord, Verdict};
use crate::corpus::{EventLabel, MentionSpan};
use crate::textproc::SentenceUnit;

/// Slack for the band edges so that e.g. 0.1 computed as 0.1000000000000001 still passes.
const BAND_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftVerdict {
    Pass,
    Warn,
    Fail,
}

impl DriftVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            DriftVerdict::Pass => "pass",
            DriftVerdict::Warn => "warn",
            DriftVerdict::Fail => "fail",
        }
    }

    /// Pass up to `threshold / 2`, Warn up to `threshold`, Fail beyond.
    pub fn from_distance(l1: f64, threshold: f64) -> Self {
        if l1 <= threshold / 2.0 + BAND_EPS {
            DriftVerdict::Pass
        } else if l1 <= threshold + BAND_EPS {
            DriftVerdict::Warn
        } else {
            DriftVerdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub source_dist: BTreeMap<EventLabel, f64>,
    pub accepted_dist: BTreeMap<EventLabel, f64>,
    pub l1_distance: f64,
    pub threshold: f64,
    pub verdict: DriftVerdict,
}

impl DriftReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("drift report serializes");
        s.push('\n');
        s
    }
}

/// Label proportions over mention counts, every label present as a key. `None` when there are
/// no mentions.
pub fn label_distribution<'a>(
    mentions: impl IntoIterator<Item = &'a MentionSpan>,
) -> Option<BTreeMap<EventLabel, f64>> {
    let mut counts: BTreeMap<EventLabel, usize> = EventLabel::ALL.iter().map(|&l| (l, 0)).collect();
    let mut total = 0usize;
    for m in mentions {
        *counts.entry(m.label).or_default() += 1;
        total += 1;
    }
    (total > 0).then(|| {
        counts
            .into_iter()
            .map(|(l, n)| (l, n as f64 / total as f64))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DriftError {
    #[error("no accepted paraphrase carries a mention")]
    EmptyAcceptedSet,
    #[error("source units carry no mentions")]
    EmptySource,
}

/// Compare the label mix of the accepted paraphrases with that of the source units.
pub fn monitor_drift(
    source_units: &[SentenceUnit],
    records: &[AugmentationRecord],
    threshold: f64,
) -> Result<DriftReport, DriftError> {
    let accepted = records
        .iter()
        .filter(|r| r.verdict == Verdict::Accepted)
        .flat_map(|r| &r.realigned_mentions);
    let accepted_dist = label_distribution(accepted).ok_or(DriftError::EmptyAcceptedSet)?;
    let source_dist = label_distribution(source_units.iter().flat_map(|u| &u.mentions))
        .ok_or(DriftError::EmptySource)?;
    Ok(drift_between(source_dist, accepted_dist, threshold))
}

pub(crate) fn drift_between(
    source_dist: BTreeMap<EventLabel, f64>,
    accepted_dist: BTreeMap<EventLabel, f64>,
    threshold: f64,
) -> DriftReport {
    let l1_distance = EventLabel::ALL
        .iter()
        .map(|l| {
            (source_dist.get(l).copied().unwrap_or(0.0)
                - accepted_dist.get(l).copied().unwrap_or(0.0))
            .abs()
        })
        .sum();
    DriftReport {
        verdict: DriftVerdict::from_distance(l1_distance, threshold),
        source_dist,
        accepted_dist,
        l1_distance,
        threshold,
    }
}
