use std::collections::BTreeSet;

use crate::corpus::EventLabel;

pub const DEFAULT_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    /// Lowercased trigger words.
    pub triggers: BTreeSet<String>,
    pub label: EventLabel,
}

impl Rule {
    pub fn new<'a>(label: EventLabel, triggers: impl IntoIterator<Item = &'a str>) -> Self {
        Rule {
            triggers: triggers.into_iter().map(str::to_lowercase).collect(),
            label,
        }
    }
}

/// Ordered trigger rules over a left-context window of `window` tokens. Mentions with no
/// trigger in the window are `Undetermined`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub window: usize,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            rules: vec![
                Rule::new(
                    EventLabel::Disposition,
                    [
                        "start",
                        "begin",
                        "increase",
                        "decrease",
                        "stop",
                        "discontinue",
                        "switch",
                        "hold",
                    ],
                ),
                Rule::new(
                    EventLabel::NoDisposition,
                    ["continue", "takes", "remains", "maintain"],
                ),
            ],
            window: DEFAULT_WINDOW,
        }
    }
}

impl RuleSet {
    /// Label for a lowercased token, first matching rule wins.
    pub fn label_for(&self, token_lower: &str) -> Option<EventLabel> {
        self.rules
            .iter()
            .find(|r| r.triggers.contains(token_lower))
            .map(|r| r.label)
    }

    /// The same rules minus every rule emitting `label`.
    pub fn without(&self, label: EventLabel) -> RuleSet {
        RuleSet {
            rules: self
                .rules
                .iter()
                .filter(|r| r.label != label)
                .cloned()
                .collect(),
            window: self.window,
        }
    }

    pub fn is_trigger(&self, word: &str) -> bool {
        self.label_for(&word.to_lowercase()).is_some()
    }
}
