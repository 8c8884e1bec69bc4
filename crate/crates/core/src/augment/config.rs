use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::prompt::DEFAULT_TEMPLATE_ID;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config does not parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Mock,
    Http,
}

/// Where paraphrases come from. Credentials are never stored here; `api_key_env` names the
/// environment variable that holds the bearer token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    #[serde(default)]
    pub kind: ProviderKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Transport-level attempts per request, including the first.
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_backoff_cap")]
    pub backoff_max_ms: u64,
    #[serde(default)]
    pub requests_per_second: Option<f64>,
}

fn default_model() -> String {
    "gpt-3.5-turbo".into()
}
fn default_temperature() -> f64 {
    0.7
}
fn default_timeout() -> u64 {
    60
}
fn default_max_attempts() -> u32 {
    5
}
fn default_backoff() -> u64 {
    500
}
fn default_backoff_cap() -> u64 {
    30_000
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            kind: ProviderKind::Mock,
            endpoint: None,
            model: default_model(),
            api_key_env: None,
            temperature: default_temperature(),
            timeout_secs: default_timeout(),
            max_attempts: default_max_attempts(),
            backoff_base_ms: default_backoff(),
            backoff_max_ms: default_backoff_cap(),
            requests_per_second: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentConfig {
    /// Corpus directory; relative paths are resolved against the config file by the CLI.
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    pub seed: u64,
    #[serde(default = "default_retries")]
    pub max_retries_per_unit: u32,
    #[serde(default = "default_threshold")]
    pub drift_threshold: f64,
    #[serde(default = "default_template_id")]
    pub prompt_template_id: String,
    #[serde(default)]
    pub templates_dir: Option<PathBuf>,
    /// Maximum provider calls in flight.
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default)]
    pub provider: ProviderConfig,
}

fn default_fraction() -> f64 {
    0.10
}
fn default_retries() -> u32 {
    2
}
fn default_threshold() -> f64 {
    0.2
}
fn default_template_id() -> String {
    DEFAULT_TEMPLATE_ID.into()
}
fn default_concurrency() -> usize {
    4
}

impl AugmentConfig {
    pub fn new(seed: u64) -> Self {
        AugmentConfig {
            corpus: None,
            fraction: default_fraction(),
            seed,
            max_retries_per_unit: default_retries(),
            drift_threshold: default_threshold(),
            prompt_template_id: default_template_id(),
            templates_dir: None,
            concurrency: default_concurrency(),
            provider: ProviderConfig::default(),
        }
    }

    pub fn from_toml(s: &str) -> Result<Self, ConfigError> {
        let cfg: AugmentConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return bad("fraction must lie in (0, 1]");
        }
        if !(0.0..=2.0).contains(&self.drift_threshold) {
            return bad("drift_threshold must lie in [0, 2]");
        }
        if self.concurrency == 0 {
            return bad("concurrency must be at least 1");
        }
        if self.prompt_template_id.is_empty() {
            return bad("prompt_template_id is empty");
        }
        let p = &self.provider;
        if p.max_attempts == 0 {
            return bad("provider.max_attempts must be at least 1");
        }
        if p.requests_per_second
            .is_some_and(|r| !(r.is_finite() && r > 0.0))
        {
            return bad("provider.requests_per_second must be positive");
        }
        if p.kind == ProviderKind::Http && p.endpoint.is_none() {
            return bad("provider.endpoint is required for the http provider");
        }
        Ok(())
    }
}
