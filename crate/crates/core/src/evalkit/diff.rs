use std::collections::BTreeSet;

use serde::Serialize;

use super::report::{MetricsReport, ModeBlock};
use super::{EvalError, Prf, TaskMode};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEntry {
    pub field: String,
    pub a: f64,
    pub b: f64,
    /// `b - a`.
    pub delta: f64,
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDelta {
    pub task: TaskMode,
    pub entries: Vec<DeltaEntry>,
}

impl ReportDelta {
    pub fn get(&self, field: &str) -> Option<&DeltaEntry> {
        self.entries.iter().find(|e| e.field == field)
    }

    pub fn changed(&self) -> impl Iterator<Item = &DeltaEntry> {
        self.entries.iter().filter(|e| e.changed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("delta serializes");
        s.push('\n');
        s
    }
}

fn push(entries: &mut Vec<DeltaEntry>, field: String, a: f64, b: f64) {
    let delta = b - a;
    entries.push(DeltaEntry {
        field,
        a,
        b,
        delta,
        changed: delta != 0.0,
    });
}

fn push_prf(entries: &mut Vec<DeltaEntry>, prefix: &str, a: &Prf, b: &Prf) {
    push(
        entries,
        format!("{prefix}.precision"),
        a.precision,
        b.precision,
    );
    push(entries, format!("{prefix}.recall"), a.recall, b.recall);
    push(entries, format!("{prefix}.fscore"), a.fscore, b.fscore);
}

fn diff_block(entries: &mut Vec<DeltaEntry>, mode: &str, a: &ModeBlock, b: &ModeBlock) {
    push_prf(entries, &format!("{mode}.micro"), &a.micro, &b.micro);
    let (ma, mb) = (&a.macro_avg, &b.macro_avg);
    push(
        entries,
        format!("{mode}.macro.precision"),
        ma.precision,
        mb.precision,
    );
    push(
        entries,
        format!("{mode}.macro.recall"),
        ma.recall,
        mb.recall,
    );
    push(
        entries,
        format!("{mode}.macro.fscore"),
        ma.fscore,
        mb.fscore,
    );
    let classes: BTreeSet<&String> = a.per_class.keys().chain(b.per_class.keys()).collect();
    for class in classes {
        let pa = a.per_class.get(class).copied().unwrap_or_default();
        let pb = b.per_class.get(class).copied().unwrap_or_default();
        push_prf(entries, &format!("{mode}.per_class.{class}"), &pa, &pb);
    }
}

/// Signed per-field differences `b - a` between two reports of the same task.
pub fn diff_reports(a: &MetricsReport, b: &MetricsReport) -> Result<ReportDelta, EvalError> {
    if a.task != b.task {
        return Err(EvalError::TaskMismatch {
            a: a.task.as_str(),
            b: b.task.as_str(),
        });
    }
    let mut entries = Vec::new();
    diff_block(&mut entries, "strict", &a.strict, &b.strict);
    diff_block(&mut entries, "lenient", &a.lenient, &b.lenient);
    Ok(ReportDelta {
        task: a.task,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::{MatchPolicy, REPORT_SCHEMA_VERSION};

    fn report(task: TaskMode, micro_f: f64) -> MetricsReport {
        let mut strict = ModeBlock::default();
        strict.micro.fscore = micro_f;
        MetricsReport {
            schema_version: REPORT_SCHEMA_VERSION,
            task,
            match_policy: MatchPolicy::Maximum,
            macro_excludes_absent: true,
            documents: 0,
            gold_mentions: 0,
            predicted_mentions: 0,
            documents_with_overlapping_gold: 0,
            strict,
            lenient: ModeBlock::default(),
        }
    }

    #[test]
    fn identical_reports_have_zero_delta() {
        let a = report(TaskMode::Identification, 0.8);
        let d = diff_reports(&a, &a).unwrap();
        assert!(d.entries.iter().all(|e| e.delta == 0.0 && !e.changed));
        assert_eq!(d.changed().count(), 0);
    }

    #[test]
    fn micro_f_delta() {
        let a = report(TaskMode::Identification, 0.80);
        let b = report(TaskMode::Identification, 0.81);
        let d = diff_reports(&a, &b).unwrap();
        let e = d.get("strict.micro.fscore").unwrap();
        assert!((e.delta - 0.01).abs() < 1e-12);
        assert!(e.changed);
        assert_eq!(d.changed().count(), 1);
    }

    #[test]
    fn task_mismatch() {
        let a = report(TaskMode::Identification, 0.8);
        let b = report(TaskMode::EventClassification, 0.8);
        assert!(matches!(
            diff_reports(&a, &b),
            Err(EvalError::TaskMismatch { .. })
        ));
    }
}
