use std::fmt;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ConfigError, ProviderConfig, ProviderKind};
use super::entities::find_occurrences;
use crate::textproc::tokenize;

/// What a provider is asked. Real providers only read `prompt`; the unit text and entity list
/// travel alongside so that the mock can paraphrase without parsing the prompt back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderRequest {
    pub prompt: String,
    pub text: String,
    pub entities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("rate limited{}", retry_after.map(|d| format!(" (retry after {}s)", d.as_secs_f64())).unwrap_or_default())]
    RateLimited { retry_after: Option<Duration> },
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("provider rejected the request{}: {message}", status.map(|s| format!(" with status {s}")).unwrap_or_default())]
    ProviderRejection {
        status: Option<u16>,
        message: String,
    },
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderErrorKind {
    RateLimited,
    Timeout,
    Transport,
    ProviderRejection,
    MalformedResponse,
}

impl ProviderError {
    pub fn kind(&self) -> ProviderErrorKind {
        match self {
            ProviderError::RateLimited { .. } => ProviderErrorKind::RateLimited,
            ProviderError::Timeout => ProviderErrorKind::Timeout,
            ProviderError::Transport(_) => ProviderErrorKind::Transport,
            ProviderError::ProviderRejection { .. } => ProviderErrorKind::ProviderRejection,
            ProviderError::MalformedResponse(_) => ProviderErrorKind::MalformedResponse,
        }
    }

    pub fn is_retryable(&self) -> bool {
        match self {
            ProviderError::RateLimited { .. }
            | ProviderError::Timeout
            | ProviderError::Transport(_) => true,
            ProviderError::ProviderRejection { status, .. } => status.is_some_and(|s| s >= 500),
            ProviderError::MalformedResponse(_) => false,
        }
    }
}

pub trait Provider: Send + Sync {
    fn name(&self) -> &str;
    fn paraphrase(&self, req: &ProviderRequest) -> Result<String, ProviderError>;
}

impl<P: Provider + ?Sized> Provider for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn paraphrase(&self, req: &ProviderRequest) -> Result<String, ProviderError> {
        (**self).paraphrase(req)
    }
}

const SYNONYMS: &[(&str, &str)] = &[
    ("begin", "commence"),
    ("consider", "weigh"),
    ("continue", "keep"),
    ("daily", "each day"),
    ("decrease", "lower"),
    ("discontinue", "cease"),
    ("discussed", "talked about"),
    ("hold", "pause"),
    ("increase", "raise"),
    ("maintain", "keep up"),
    ("needed", "required"),
    ("night", "bedtime"),
    ("patient", "pt"),
    ("remains", "stays"),
    ("review", "reassess"),
    ("start", "initiate"),
    ("stop", "halt"),
    ("takes", "uses"),
    ("weekly", "every week"),
];

const CLAUSES: &[(&str, &str)] = &[
    ("", ""),
    ("Plan: ", ""),
    ("", " per the care team."),
    ("Per today's visit: ", ""),
];

/// Deterministic offline paraphraser: word-level synonym swaps outside entity surfaces, then a
/// framing clause picked by a hash of the prompt. Entity characters are never touched.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider;

impl MockProvider {
    fn swap_synonyms(text: &str, entities: &[String]) -> String {
        let protected: Vec<(usize, usize)> = entities
            .iter()
            .flat_map(|e| find_occurrences(text, e))
            .collect();
        let chars: Vec<char> = text.chars().collect();
        let mut out = String::with_capacity(text.len() + 16);
        let mut pos = 0;
        for tok in tokenize(text) {
            if protected.iter().any(|&(s, e)| tok.start < e && s < tok.end) {
                continue;
            }
            let lower = tok.surface.to_lowercase();
            let Ok(i) = SYNONYMS.binary_search_by(|(k, _)| k.cmp(&lower.as_str())) else {
                continue;
            };
            out.extend(&chars[pos..tok.start]);
            let repl = SYNONYMS[i].1;
            if tok.surface.starts_with(char::is_uppercase) {
                let mut cs = repl.chars();
                if let Some(first) = cs.next() {
                    out.extend(first.to_uppercase());
                    out.push_str(cs.as_str());
                }
            } else {
                out.push_str(repl);
            }
            pos = tok.end;
        }
        out.extend(&chars[pos..]);
        out
    }
}

impl Provider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn paraphrase(&self, req: &ProviderRequest) -> Result<String, ProviderError> {
        let digest = Sha256::digest(req.prompt.as_bytes());
        let (prefix, suffix) = CLAUSES[digest[0] as usize % CLAUSES.len()];
        let body = Self::swap_synonyms(req.text.trim(), &req.entities);
        if suffix.is_empty() {
            return Ok(format!("{prefix}{body}"));
        }
        let stem = body.strip_suffix('.').unwrap_or(&body);
        Ok(format!("{prefix}{stem},{suffix}"))
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: Option<String>,
}

/// Extract `choices[0].message.content` from a chat-completion response body.
pub fn parse_chat_response(body: &str) -> Result<String, ProviderError> {
    let resp: ChatResponse =
        serde_json::from_str(body).map_err(|e| ProviderError::MalformedResponse(e.to_string()))?;
    let content = resp
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| ProviderError::MalformedResponse("no choices".into()))?
        .message
        .content
        .ok_or_else(|| ProviderError::MalformedResponse("choice has no content".into()))?;
    let content = content.trim();
    if content.is_empty() {
        return Err(ProviderError::MalformedResponse("empty content".into()));
    }
    Ok(content.to_string())
}

/// Chat-completion client. The bearer token is read once from the environment and never
/// printed.
pub struct HttpProvider {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
}

impl fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpProvider")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl HttpProvider {
    pub fn new(
        endpoint: impl Into<String>,
        model: impl Into<String>,
        temperature: f64,
        timeout: Duration,
        api_key: Option<String>,
    ) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(HttpProvider {
            client,
            endpoint: endpoint.into(),
            model: model.into(),
            temperature,
            api_key,
        })
    }
}

fn transport(e: reqwest::Error) -> ProviderError {
    if e.is_timeout() {
        ProviderError::Timeout
    } else {
        ProviderError::Transport(e.to_string())
    }
}

impl Provider for HttpProvider {
    fn name(&self) -> &str {
        "http"
    }

    fn paraphrase(&self, req: &ProviderRequest) -> Result<String, ProviderError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": self.temperature,
        });
        let mut rb = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            rb = rb.bearer_auth(key);
        }
        let resp = rb.send().map_err(transport)?;
        let status = resp.status().as_u16();
        if status == 429 {
            let retry_after = resp
                .headers()
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|s| s.is_finite() && *s >= 0.0)
                .map(Duration::from_secs_f64);
            return Err(ProviderError::RateLimited { retry_after });
        }
        if status == 408 || status == 504 {
            return Err(ProviderError::Timeout);
        }
        let text = resp.text().map_err(transport)?;
        if !(200..300).contains(&status) {
            return Err(ProviderError::ProviderRejection {
                status: Some(status),
                message: text.chars().take(200).collect(),
            });
        }
        parse_chat_response(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Attempts including the first.
    pub max_attempts: u32,
    pub base: Duration,
    pub max_delay: Duration,
}

impl RetryPolicy {
    /// Wait before attempt `attempt + 1`: `base * 2^(attempt-1)` capped at `max_delay`, but
    /// never shorter than a server-sent retry-after.
    pub fn delay(&self, attempt: u32, err: &ProviderError) -> Duration {
        let exp = self
            .base
            .saturating_mul(1u32 << (attempt.saturating_sub(1)).min(20))
            .min(self.max_delay);
        match err {
            ProviderError::RateLimited {
                retry_after: Some(ra),
            } => exp.max(*ra),
            _ => exp,
        }
    }
}

/// Blocking token bucket shared by all workers.
#[derive(Debug)]
pub struct TokenBucket {
    rate: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn new(per_second: f64) -> Self {
        let capacity = per_second.max(1.0);
        TokenBucket {
            rate: per_second,
            capacity,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().expect("bucket lock");
                let now = Instant::now();
                let refill = now.duration_since(st.1).as_secs_f64() * self.rate;
                st.0 = (st.0 + refill).min(self.capacity);
                st.1 = now;
                if st.0 >= 1.0 {
                    st.0 -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - st.0) / self.rate)
            };
            std::thread::sleep(wait);
        }
    }
}

type Sleeper = Box<dyn Fn(Duration) + Send + Sync>;

/// Wraps a provider with rate limiting and exponential backoff on retryable errors.
pub struct RetryingProvider<P> {
    inner: P,
    policy: RetryPolicy,
    bucket: Option<TokenBucket>,
    sleep: Sleeper,
}

impl<P: Provider> RetryingProvider<P> {
    pub fn new(inner: P, policy: RetryPolicy, bucket: Option<TokenBucket>) -> Self {
        RetryingProvider {
            inner,
            policy,
            bucket,
            sleep: Box::new(std::thread::sleep),
        }
    }

    /// Replace the sleep function, e.g. to record delays in tests.
    pub fn with_sleeper(mut self, sleep: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleep = Box::new(sleep);
        self
    }
}

impl<P: Provider> Provider for RetryingProvider<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn paraphrase(&self, req: &ProviderRequest) -> Result<String, ProviderError> {
        let mut attempt = 1;
        loop {
            if let Some(b) = &self.bucket {
                b.acquire();
            }
            match self.inner.paraphrase(req) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() && attempt < self.policy.max_attempts => {
                    (self.sleep)(self.policy.delay(attempt, &e));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Build the configured provider wrapped in retry and rate limiting.
pub fn build_provider(cfg: &ProviderConfig) -> Result<Box<dyn Provider>, ConfigError> {
    let policy = RetryPolicy {
        max_attempts: cfg.max_attempts,
        base: Duration::from_millis(cfg.backoff_base_ms),
        max_delay: Duration::from_millis(cfg.backoff_max_ms),
    };
    let bucket = cfg.requests_per_second.map(TokenBucket::new);
    match cfg.kind {
        ProviderKind::Mock => Ok(Box::new(RetryingProvider::new(
            MockProvider,
            policy,
            bucket,
        ))),
        ProviderKind::Http => {
            let endpoint = cfg
                .endpoint
                .clone()
                .ok_or_else(|| ConfigError::Invalid("provider.endpoint is required".into()))?;
            let api_key = match &cfg.api_key_env {
                Some(var) => Some(std::env::var(var).map_err(|_| {
                    ConfigError::Invalid(format!("environment variable {var} is not set"))
                })?),
                None => None,
            };
            let http = HttpProvider::new(
                endpoint,
                cfg.model.clone(),
                cfg.temperature,
                Duration::from_secs(cfg.timeout_secs),
                api_key,
            )
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            Ok(Box::new(RetryingProvider::new(http, policy, bucket)))
        }
    }
}
