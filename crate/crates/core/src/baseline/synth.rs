use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::corpus::{AnnotatedDocument, Corpus, EventLabel, MentionSpan, Split};
use crate::text::char_len;

const HEADER: &str = "Assessment and plan:\n";

const DISPOSITION_TRIGGERS: &[&str] = &[
    "Start",
    "Begin",
    "Increase",
    "Decrease",
    "Stop",
    "Discontinue",
    "Hold",
    "Switch to",
];
const NO_DISPOSITION_TRIGGERS: &[&str] = &["Continue", "Maintain", "Patient takes", "Remains on"];
const UNDETERMINED_TRIGGERS: &[&str] = &["Consider", "Discussed", "Review", "History of"];
const DOSES: &[&str] = &["5 mg", "10 mg", "20 mg", "40 mg", "81 mg", "500 mg", "1 g"];
const FREQUENCIES: &[&str] = &["daily", "twice daily", "at night", "weekly", "as needed"];

fn default_vocabulary() -> Vec<String> {
    [
        "Lipitor",
        "metformin",
        "lisinopril",
        "aspirin",
        "warfarin",
        "insulin glargine",
        "amlodipine",
        "atorvastatin",
        "furosemide",
        "levothyroxine",
        "omeprazole",
        "prednisone",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelMix {
    pub disposition: f64,
    pub no_disposition: f64,
    pub undetermined: f64,
}

impl Default for LabelMix {
    fn default() -> Self {
        LabelMix {
            disposition: 0.2,
            no_disposition: 0.6,
            undetermined: 0.2,
        }
    }
}

impl LabelMix {
    fn weights(&self) -> [(EventLabel, f64); 3] {
        [
            (EventLabel::Disposition, self.disposition),
            (EventLabel::NoDisposition, self.no_disposition),
            (EventLabel::Undetermined, self.undetermined),
        ]
    }
}

/// Synthetic corpus description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub n_documents: usize,
    #[serde(default = "default_sentences_min")]
    pub sentences_min: usize,
    #[serde(default = "default_sentences_max")]
    pub sentences_max: usize,
    pub seed: u64,
    #[serde(default = "default_vocabulary")]
    pub vocabulary: Vec<String>,
    #[serde(default)]
    pub label_mix: LabelMix,
    #[serde(default = "default_fraction")]
    pub dev_fraction: f64,
    #[serde(default = "default_fraction")]
    pub test_fraction: f64,
}

fn default_name() -> String {
    "synthetic".into()
}
fn default_sentences_min() -> usize {
    3
}
fn default_sentences_max() -> usize {
    8
}
fn default_fraction() -> f64 {
    0.1
}

impl SyntheticSpec {
    pub fn new(n_documents: usize, seed: u64) -> Self {
        SyntheticSpec {
            name: default_name(),
            n_documents,
            sentences_min: default_sentences_min(),
            sentences_max: default_sentences_max(),
            seed,
            vocabulary: default_vocabulary(),
            label_mix: LabelMix::default(),
            dev_fraction: default_fraction(),
            test_fraction: default_fraction(),
        }
    }

    pub fn from_toml(s: &str) -> Result<Self, BaselineError> {
        let spec: SyntheticSpec =
            toml::from_str(s).map_err(|e| BaselineError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |m: String| Err(BaselineError::InvalidSpec(m));
        if self.n_documents == 0 {
            return bad("n_documents must be positive".into());
        }
        if self.sentences_min == 0 || self.sentences_min > self.sentences_max {
            return bad(format!(
                "sentence range {}..={} is empty or starts at zero",
                self.sentences_min, self.sentences_max
            ));
        }
        if self.vocabulary.is_empty() {
            return bad("vocabulary is empty".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &self.vocabulary {
            let norm = crate::text::normalize_ws_lower(v);
            if norm.is_empty() || v.chars().any(|c| c.is_whitespace() && c != ' ') {
                return bad(format!(
                    "vocabulary entry {v:?} is blank or has non-space whitespace"
                ));
            }
            if !seen.insert(norm) {
                return bad(format!("vocabulary entry {v:?} repeats"));
            }
        }
        let w = self.label_mix.weights();
        if w.iter().any(|(_, p)| !p.is_finite() || *p < 0.0) {
            return bad("label_mix proportions must be finite and non-negative".into());
        }
        let sum: f64 = w.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("label_mix proportions sum to {sum}, not 1"));
        }
        let (d, t) = (self.dev_fraction, self.test_fraction);
        if !(0.0..=1.0).contains(&d) || !(0.0..=1.0).contains(&t) || d + t > 1.0 {
            return bad(
                "dev_fraction and test_fraction must lie in [0, 1] and sum to at most 1".into(),
            );
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `total` items over `weights`.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let missing = total - counts.iter().sum::<usize>();
    for &i in order.iter().cycle().take(missing) {
        counts[i] += 1;
    }
    counts
}

fn triggers(label: EventLabel) -> &'static [&'static str] {
    match label {
        EventLabel::Disposition => DISPOSITION_TRIGGERS,
        EventLabel::NoDisposition => NO_DISPOSITION_TRIGGERS,
        EventLabel::Undetermined => UNDETERMINED_TRIGGERS,
    }
}

/// Generate a seeded corpus of templated sentences, one labeled medication mention each.
///
/// Labels across the whole corpus follow the mix exactly up to rounding. Every vocabulary entry
/// is placed at least once in a training document when there are enough training sentences.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Corpus, BaselineError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sentence_counts: Vec<usize> = (0..spec.n_documents)
        .map(|_| rng.gen_range(spec.sentences_min..=spec.sentences_max))
        .collect();
    let total: usize = sentence_counts.iter().sum();

    let weights: Vec<f64> = spec.label_mix.weights().iter().map(|(_, p)| *p).collect();
    let mut labels: Vec<EventLabel> = Vec::with_capacity(total);
    for ((label, _), n) in spec
        .label_mix
        .weights()
        .iter()
        .zip(apportion(total, &weights))
    {
        labels.extend(std::iter::repeat_n(*label, n));
    }
    labels.shuffle(&mut rng);

    let n = spec.n_documents;
    let n_test = (spec.test_fraction * n as f64).round() as usize;
    let n_dev = ((spec.dev_fraction * n as f64).round() as usize).min(n - n_test);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut splits = vec![Split::Train; n];
    for (rank, &i) in order.iter().enumerate() {
        if rank < n_test {
            splits[i] = Split::Test;
        } else if rank < n_test + n_dev {
            splits[i] = Split::Dev;
        }
    }

    // The first training sentences cycle through the vocabulary so the training split covers it.
    let mut drug_cycle = 0usize;
    let mut corpus = Corpus::new(spec.name.clone());
    let mut next_label = labels.into_iter();
    for (i, &count) in sentence_counts.iter().enumerate() {
        let mut text = String::from(HEADER);
        let mut pos = char_len(HEADER);
        let mut mentions = Vec::with_capacity(count);
        for s in 0..count {
            let label = next_label.next().expect("one label per sentence");
            let drug = if splits[i] == Split::Train && drug_cycle < spec.vocabulary.len() {
                drug_cycle += 1;
                &spec.vocabulary[drug_cycle - 1]
            } else {
                spec.vocabulary
                    .choose(&mut rng)
                    .expect("non-empty vocabulary")
            };
            let trigger = triggers(label).choose(&mut rng).expect("non-empty");
            let dose = DOSES.choose(&mut rng).expect("non-empty");
            let freq = FREQUENCIES.choose(&mut rng).expect("non-empty");
            if s > 0 {
                text.push(' ');
                pos += 1;
            }
            let start = pos + char_len(trigger) + 1;
            let end = start + char_len(drug);
            let sentence = format!("{trigger} {drug} {dose} {freq}.");
            pos += char_len(&sentence);
            text.push_str(&sentence);
            mentions.push(MentionSpan::new(
                format!("T{}", s + 1),
                start,
                end,
                drug.as_str(),
                label,
            ));
        }
        let doc_id = format!("syn{i:05}");
        let doc = AnnotatedDocument::new(doc_id, text, mentions)
            .expect("generated mentions satisfy document invariants");
        corpus.insert(doc, splits[i]);
    }
    Ok(corpus)
}
