//! Strict and lenient span matching with micro/macro precision, recall and F-score for
//! medication identification and medication event classification.

mod diff;
mod matching;
mod report;
mod score;

use serde::{Deserialize, Serialize};

pub use diff::{diff_reports, DeltaEntry, ReportDelta};
pub use matching::{match_spans, match_spans_with, MatchPolicy, MatchResult};
pub use report::{MacroPrf, MetricsReport, ModeBlock, REPORT_SCHEMA_VERSION};
pub use score::{score, score_with, ScoreOptions};

/// How gold and predicted offsets must relate for a pair to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Both offsets equal.
    Strict,
    /// Non-empty intersection of the two offset ranges.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMode {
    /// Labels are ignored; every mention is one `Drug` class.
    Identification,
    /// A true positive also needs equal event labels.
    EventClassification,
}

impl TaskMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskMode::Identification => "identification",
            TaskMode::EventClassification => "event_classification",
        }
    }
}

impl std::str::FromStr for TaskMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "id" | "identification" => Ok(TaskMode::Identification),
            "event" | "event_classification" => Ok(TaskMode::EventClassification),
            other => Err(format!("unknown task `{other}` (expected id or event)")),
        }
    }
}

/// Precision, recall and F-score with the counts they came from. Each ratio is 0 when its
/// denominator is 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl Prf {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let precision = ratio(tp as f64, (tp + fp) as f64);
        let recall = ratio(tp as f64, (tp + fn_) as f64);
        let fscore = ratio(2.0 * precision * recall, precision + recall);
        Prf {
            precision,
            recall,
            fscore,
            tp,
            fp,
            fn_,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("predictions reference unknown document `{0}`")]
    UnknownDocument(String),
    #[error("document `{doc_id}`: prediction `{mention_id}` [{start}, {end}) is not a valid span")]
    InvalidSpan {
        doc_id: String,
        mention_id: String,
        start: usize,
        end: usize,
    },
    #[error("cannot compare a {a} report with a {b} report")]
    TaskMismatch { a: &'static str, b: &'static str },
}
