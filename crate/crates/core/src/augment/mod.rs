//! Paraphrase augmentation: sample sentence units, prompt a provider, keep candidates that
//! preserve every medication mention, re-align offsets, watch label drift and merge.

mod config;
mod drift;
mod entities;
mod merge;
mod pipeline;
mod prompt;
mod provider;
mod record;
mod sample;

pub use config::{AugmentConfig, ConfigError, ProviderConfig, ProviderKind};
pub use drift::{label_distribution, monitor_drift, DriftError, DriftReport, DriftVerdict};
pub use entities::{find_occurrences, realign_entities, validate_candidate, RealignFailure};
pub use merge::{merge_corpus, MergeError};
pub use pipeline::{run_augmentation, AugmentRun, StageCounts};
pub use prompt::{render_prompt, PromptTemplate, TemplateError, DEFAULT_TEMPLATE_ID};
pub use provider::{
    build_provider, parse_chat_response, HttpProvider, MockProvider, Provider, ProviderError,
    ProviderErrorKind, ProviderRequest, RetryPolicy, RetryingProvider, TokenBucket,
};
pub use record::{
    read_records, write_records, AugmentationRecord, RecordError, Verdict, RECORD_SCHEMA_VERSION,
};
pub use sample::{eligible_units, sample_count, sample_units, SampleError};
