//! Corpus tooling for medication-annotated clinical text.
//!
//! The crate covers four stages:
//!
//! * [`corpus`]: standoff annotation parsing, serialization, corpus loading and validation.
//! * [`textproc`]: offset-preserving tokenization and sentence units, plus a BIO codec.
//! * [`augment`]: paraphrase augmentation of sampled training sentences with entity
//!   re-alignment, label-drift monitoring and merging back into the training split.
//! * [`evalkit`]: strict/lenient span matching with micro and macro precision/recall/F.
//!
//! [`baseline`] supplies a gazetteer + trigger-rule tagger and a synthetic corpus generator so
//! the whole pipeline runs without an ML runtime, and [`cli`] exposes every stage as a
//! subcommand.

pub mod augment;
pub mod baseline;
pub mod cli;
pub mod corpus;
pub mod evalkit;
pub mod fsutil;
pub mod text;
pub mod textproc;

pub use corpus::{AnnotatedDocument, Corpus, EventLabel, MentionSpan, Split};
pub use evalkit::{MatchMode, MetricsReport, TaskMode};
