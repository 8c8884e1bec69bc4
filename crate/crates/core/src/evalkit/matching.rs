use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::{MatchMode, TaskMode};
use crate::corpus::MentionSpan;

/// One-to-one pairing policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchPolicy {
    /// Gold in `(start, end)` order, each taking the unmatched compatible prediction with the
    /// largest overlap (ties: smaller start, then smaller end). This is the usual N2C2
    /// evaluator behaviour and can under-count when one prediction overlaps two gold spans.
    Greedy,
    /// The greedy pairing extended by augmenting paths to a maximum-cardinality matching.
    /// Greedy pairs survive unless re-pairing is needed to match more gold spans.
    #[default]
    Maximum,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchResult {
    /// `(gold, predicted)` pairs in gold order; `pairs.len()` is the true-positive count.
    pub pairs: Vec<(MentionSpan, MentionSpan)>,
    pub unmatched_gold: Vec<MentionSpan>,
    pub unmatched_pred: Vec<MentionSpan>,
}

fn overlap(a: &MentionSpan, b: &MentionSpan) -> usize {
    a.end.min(b.end).saturating_sub(a.start.max(b.start))
}

fn compatible(g: &MentionSpan, p: &MentionSpan, mode: MatchMode, task: TaskMode) -> bool {
    let offsets = match mode {
        MatchMode::Strict => g.start == p.start && g.end == p.end,
        MatchMode::Lenient => overlap(g, p) > 0,
    };
    offsets && (task == TaskMode::Identification || g.label == p.label)
}

fn content_order(spans: &[MentionSpan]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..spans.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (&spans[a], &spans[b]);
        (x.start, x.end, x.label, &x.mention_id).cmp(&(y.start, y.end, y.label, &y.mention_id))
    });
    idx
}

struct Matcher {
    /// For each gold (in gold order), compatible preds in preference order.
    candidates: Vec<Vec<usize>>,
    pred_owner: Vec<Option<usize>>,
    gold_partner: Vec<Option<usize>>,
}

impl Matcher {
    fn try_augment(&mut self, g: usize, visited: &mut [bool]) -> bool {
        for k in 0..self.candidates[g].len() {
            let p = self.candidates[g][k];
            if visited[p] {
                continue;
            }
            visited[p] = true;
            let free = match self.pred_owner[p] {
                None => true,
                Some(owner) => self.try_augment(owner, visited),
            };
            if free {
                self.pred_owner[p] = Some(g);
                self.gold_partner[g] = Some(p);
                return true;
            }
        }
        false
    }
}

/// Pair gold and predicted spans of one document with the default [`MatchPolicy::Maximum`].
pub fn match_spans(
    gold: &[MentionSpan],
    pred: &[MentionSpan],
    mode: MatchMode,
    task: TaskMode,
) -> MatchResult {
    match_spans_with(gold, pred, mode, task, MatchPolicy::default())
}

pub fn match_spans_with(
    gold: &[MentionSpan],
    pred: &[MentionSpan],
    mode: MatchMode,
    task: TaskMode,
    policy: MatchPolicy,
) -> MatchResult {
    let gold_order = content_order(gold);
    let pred_order = content_order(pred);

    // candidate lists indexed by position in gold_order, holding positions in pred_order
    let candidates: Vec<Vec<usize>> = gold_order
        .iter()
        .map(|&gi| {
            let g = &gold[gi];
            let mut c: Vec<usize> = (0..pred_order.len())
                .filter(|&pk| compatible(g, &pred[pred_order[pk]], mode, task))
                .collect();
            // stable sort keeps content order as the final tie-break
            c.sort_by_key(|&pk| {
                let p = &pred[pred_order[pk]];
                (Reverse(overlap(g, p)), p.start, p.end)
            });
            c
        })
        .collect();

    let mut m = Matcher {
        candidates,
        pred_owner: vec![None; pred.len()],
        gold_partner: vec![None; gold.len()],
    };

    for g in 0..gold_order.len() {
        if let Some(&p) = m.candidates[g].iter().find(|&&p| m.pred_owner[p].is_none()) {
            m.pred_owner[p] = Some(g);
            m.gold_partner[g] = Some(p);
        }
    }
    if policy == MatchPolicy::Maximum {
        for g in 0..gold_order.len() {
            if m.gold_partner[g].is_none() && !m.candidates[g].is_empty() {
                let mut visited = vec![false; pred.len()];
                m.try_augment(g, &mut visited);
            }
        }
    }

    let mut result = MatchResult::default();
    for (g, partner) in m.gold_partner.iter().enumerate() {
        let gs = gold[gold_order[g]].clone();
        match partner {
            Some(p) => result.pairs.push((gs, pred[pred_order[*p]].clone())),
            None => result.unmatched_gold.push(gs),
        }
    }
    for (p, owner) in m.pred_owner.iter().enumerate() {
        if owner.is_none() {
            result.unmatched_pred.push(pred[pred_order[p]].clone());
        }
    }
    result
}
