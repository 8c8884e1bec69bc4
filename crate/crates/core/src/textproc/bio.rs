use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sentences::SentenceUnit;
use super::tokenize::{tokenize, Token};
use crate::corpus::{EventLabel, MentionSpan, UnknownLabel};
use crate::text::CharIndex;

pub const DRUG_TAG_LABEL: &str = "Drug";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BioTag {
    O,
    B(String),
    I(String),
}

impl BioTag {
    pub fn label(&self) -> Option<&str> {
        match self {
            BioTag::O => None,
            BioTag::B(l) | BioTag::I(l) => Some(l),
        }
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioTag::O => f.write_str("O"),
            BioTag::B(l) => write!(f, "B-{l}"),
            BioTag::I(l) => write!(f, "I-{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid BIO tag `{0}`")]
pub struct TagParseError(pub String);

impl FromStr for BioTag {
    type Err = TagParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(BioTag::O);
        }
        let bad = || TagParseError(s.to_string());
        let (prefix, label) = s.split_once('-').ok_or_else(bad)?;
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(bad());
        }
        match prefix {
            "B" => Ok(BioTag::B(label.to_string())),
            "I" => Ok(BioTag::I(label.to_string())),
            _ => Err(bad()),
        }
    }
}

impl Serialize for BioTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BioTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which label inventory the tags carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelScheme {
    /// Single `Drug` label: tags `O`, `B-Drug`, `I-Drug`.
    Identification,
    /// The three event labels.
    Event,
}

impl LabelScheme {
    fn label_for(self, m: &MentionSpan) -> String {
        match self {
            LabelScheme::Identification => DRUG_TAG_LABEL.to_string(),
            LabelScheme::Event => m.label.as_str().to_string(),
        }
    }

    /// Every tag the scheme can emit, `O` first.
    pub fn tag_set(self) -> Vec<BioTag> {
        let labels: Vec<&str> = match self {
            LabelScheme::Identification => vec![DRUG_TAG_LABEL],
            LabelScheme::Event => EventLabel::ALL.iter().map(|l| l.as_str()).collect(),
        };
        let mut tags = vec![BioTag::O];
        for l in labels {
            tags.push(BioTag::B(l.into()));
            tags.push(BioTag::I(l.into()));
        }
        tags
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSequence {
    pub doc_id: String,
    pub tokens: Vec<Token>,
    pub tags: Vec<BioTag>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub sequence: TaggedSequence,
    /// Mentions whose boundaries fell inside a token and were widened to token edges.
    pub snapped: usize,
    /// Mentions that covered no token, or only tokens already claimed by an earlier mention.
    pub dropped: usize,
}

/// Tag a unit's tokens: `B-<label>` on the first token of each mention, `I-<label>` on the
/// rest, `O` elsewhere. Offsets are unit-local.
pub fn encode_bio(unit: &SentenceUnit, scheme: LabelScheme) -> Encoded {
    let tokens = tokenize(&unit.text);
    let mut tags = vec![BioTag::O; tokens.len()];
    let mut snapped = 0;
    let mut dropped = 0;
    let mut mentions: Vec<&MentionSpan> = unit.mentions.iter().collect();
    mentions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    for m in mentions {
        let covered: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.start < m.end && m.start < t.end)
            .map(|(i, _)| i)
            .collect();
        let (Some(&first), Some(&last)) = (covered.first(), covered.last()) else {
            dropped += 1;
            continue;
        };
        if covered.iter().any(|&i| tags[i] != BioTag::O) {
            dropped += 1;
            continue;
        }
        if tokens[first].start != m.start || tokens[last].end != m.end {
            snapped += 1;
        }
        let label = scheme.label_for(m);
        tags[first] = BioTag::B(label.clone());
        for &i in &covered[1..] {
            tags[i] = BioTag::I(label.clone());
        }
    }
    Encoded {
        sequence: TaggedSequence {
            doc_id: unit.doc_id.clone(),
            tokens,
            tags,
        },
        snapped,
        dropped,
    }
}

/// A decoded span over token offsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BioSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decoded {
    pub spans: Vec<BioSpan>,
    /// Number of `I-` tags that did not continue a span of the same label and were read as `B-`.
    pub repairs: usize,
}

impl Decoded {
    /// Attach surfaces from `text` (the text the token offsets index) and turn labels into
    /// event labels. `Drug` becomes `Undetermined` with `from_drug_label` set.
    pub fn to_mentions(&self, text: &str) -> Result<Vec<MentionSpan>, UnknownLabel> {
        let index = CharIndex::new(text);
        self.spans
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let (label, from_drug_label) = if s.label == DRUG_TAG_LABEL {
                    (EventLabel::Undetermined, true)
                } else {
                    (s.label.parse()?, false)
                };
                let surface = index.slice(s.start, s.end).unwrap_or_default();
                Ok(MentionSpan {
                    mention_id: format!("T{}", i + 1),
                    start: s.start,
                    end: s.end,
                    surface: surface.to_string(),
                    label,
                    from_drug_label,
                })
            })
            .collect()
    }
}

/// Turn maximal `B I*` runs into spans. A stray `I-X` (after `O` or after a different label)
/// opens a new span as if it were `B-X` and is counted as a repair.
pub fn decode_bio(seq: &TaggedSequence) -> Decoded {
    let mut out = Decoded::default();
    let mut open: Option<BioSpan> = None;
    for (tok, tag) in seq.tokens.iter().zip(&seq.tags) {
        match tag {
            BioTag::O => out.spans.extend(open.take()),
            BioTag::B(label) => {
                out.spans.extend(open.take());
                open = Some(BioSpan {
                    start: tok.start,
                    end: tok.end,
                    label: label.clone(),
                });
            }
            BioTag::I(label) => match open.as_mut() {
                Some(span) if &span.label == label => span.end = tok.end,
                _ => {
                    out.repairs += 1;
                    out.spans.extend(open.take());
                    open = Some(BioSpan {
                        start: tok.start,
                        end: tok.end,
                        label: label.clone(),
                    });
                }
            },
        }
    }
    out.spans.extend(open);
    out
}
