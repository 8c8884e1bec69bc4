use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::matching::MatchPolicy;
use super::{Prf, TaskMode};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MacroPrf {
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    /// Number of classes averaged over.
    pub classes: usize,
}

/// Scores under one match mode.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeBlock {
    pub micro: Prf,
    #[serde(rename = "macro")]
    pub macro_avg: MacroPrf,
    pub per_class: BTreeMap<String, Prf>,
}

/// Evaluation result. Field order is the serialized key order; maps are sorted, so the JSON
/// form is byte-stable for identical inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub task: TaskMode,
    pub match_policy: MatchPolicy,
    pub macro_excludes_absent: bool,
    pub documents: usize,
    pub gold_mentions: usize,
    pub predicted_mentions: usize,
    /// Documents whose gold spans overlap each other; only there can matching policies differ.
    pub documents_with_overlapping_gold: usize,
    pub strict: ModeBlock,
    pub lenient: ModeBlock,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Plain-text table: strict columns then lenient columns, micro and macro rows, then one
    /// row per class.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "task: {}  documents: {}  gold: {}  predicted: {}",
            self.task.as_str(),
            self.documents,
            self.gold_mentions,
            self.predicted_mentions
        );
        let _ = writeln!(
            out,
            "{:<16}|{:^29}|{:^29}",
            "", "Strict Evaluation", "Lenient Evaluation"
        );
        let _ = writeln!(
            out,
            "{:<16}|{:>9}{:>10}{:>10}|{:>9}{:>10}{:>10}",
            "", "Precision", "Recall", "Fscore", "Precision", "Recall", "Fscore"
        );
        let mut row = |name: &str, s: (f64, f64, f64), l: (f64, f64, f64)| {
            let _ = writeln!(
                out,
                "{:<16}|{:>9.4}{:>10.4}{:>10.4}|{:>9.4}{:>10.4}{:>10.4}",
                name, s.0, s.1, s.2, l.0, l.1, l.2
            );
        };
        let prf = |p: &Prf| (p.precision, p.recall, p.fscore);
        let mac = |p: &MacroPrf| (p.precision, p.recall, p.fscore);
        row("Micro", prf(&self.strict.micro), prf(&self.lenient.micro));
        row(
            "Macro",
            mac(&self.strict.macro_avg),
            mac(&self.lenient.macro_avg),
        );
        for (class, s) in &self.strict.per_class {
            let l = self
                .lenient
                .per_class
                .get(class)
                .copied()
                .unwrap_or_default();
            row(class, prf(s), prf(&l));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> MetricsReport {
        MetricsReport {
            schema_version: REPORT_SCHEMA_VERSION,
            task: TaskMode::EventClassification,
            match_policy: MatchPolicy::Maximum,
            macro_excludes_absent: true,
            documents: 1,
            gold_mentions: 2,
            predicted_mentions: 2,
            documents_with_overlapping_gold: 0,
            strict: ModeBlock {
                micro: Prf::from_counts(1, 1, 1),
                macro_avg: MacroPrf {
                    precision: 0.5,
                    recall: 0.5,
                    fscore: 0.5,
                    classes: 2,
                },
                per_class: BTreeMap::from([("Disposition".into(), Prf::from_counts(1, 0, 0))]),
            },
            lenient: ModeBlock::default(),
        }
    }

    #[test]
    fn json_key_order_is_fixed() {
        let json = report().to_json();
        let keys: Vec<usize> = [
            "\"schema_version\"",
            "\"task\"",
            "\"match_policy\"",
            "\"documents\"",
            "\"strict\"",
            "\"lenient\"",
        ]
        .iter()
        .map(|k| json.find(k).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(json.contains("\"task\": \"event_classification\""));
        assert!(json.contains("\"fn\": 1"));
        assert_eq!(MetricsReport::from_json(&json).unwrap(), report());
    }

    #[test]
    fn table_layout() {
        let t = report().render_table();
        assert!(t.contains("Strict Evaluation"));
        assert!(t.find("Strict").unwrap() < t.find("Lenient").unwrap());
        assert!(t.contains("Micro           |   0.5000    0.5000    0.5000|"));
    }
}
