//! Dependency-free reference tagger and synthetic corpus generator.
//!
//! The tagger marks gazetteer hits (longest match first) and labels each hit from trigger
//! words in a small left-context window. The generator writes templated sentences whose
//! triggers come from the same lexicons, so the tagger scores perfectly on its output.

mod gazetteer;
mod rules;
mod synth;
mod tagger;

pub use gazetteer::{build_gazetteer, Gazetteer};
pub use rules::{Rule, RuleSet, DEFAULT_WINDOW};
pub use synth::{generate_synthetic, LabelMix, SyntheticSpec};
pub use tagger::{tag, tag_corpus};

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("the training split has no mentions to build a gazetteer from")]
    EmptyTrainingSet,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}
