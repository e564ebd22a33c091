//! Prompt dispatch to model backends with retries, bounded concurrency, and
//! an on-disk completion cache.

mod backend;
mod cache;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use futures::stream::{self, StreamExt};
use rand::Rng;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use wellspeech_core::hash::prompt_hash;
use wellspeech_core::mock::MockNoise;

pub use backend::{chat_completion_body, Backend, BackendError, HttpBackend, MockBackend, API_KEY_ENV};
pub use cache::CompletionCache;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    HttpOpenaiCompatible,
    Mock,
}

fn default_temperature() -> f64 {
    0.0
}
fn default_max_output_tokens() -> u32 {
    1024
}
fn default_timeout_sec() -> f64 {
    120.0
}
fn default_max_retries() -> u32 {
    3
}
fn default_concurrency_limit() -> usize {
    4
}
fn default_backoff_base_ms() -> u64 {
    1000
}
fn default_backoff_cap_ms() -> u64 {
    60_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Required for `http_openai_compatible`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    pub model_id: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    #[serde(default = "default_timeout_sec")]
    pub timeout_sec: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_concurrency_limit")]
    pub concurrency_limit: usize,
    #[serde(default = "default_backoff_base_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_backoff_cap_ms")]
    pub backoff_cap_ms: u64,
    /// Wrapping applied by the mock backend.
    #[serde(default)]
    pub mock_noise: MockNoise,
    /// Free-form serving notes (e.g. quantisation); recorded, never used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serving_notes: Option<String>,
}

impl BackendConfig {
    pub fn mock(model_id: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::Mock,
            base_url: None,
            model_id: model_id.into(),
            temperature: default_temperature(),
            max_output_tokens: default_max_output_tokens(),
            timeout_sec: default_timeout_sec(),
            max_retries: default_max_retries(),
            concurrency_limit: default_concurrency_limit(),
            backoff_base_ms: default_backoff_base_ms(),
            backoff_cap_ms: default_backoff_cap_ms(),
            mock_noise: MockNoise::Clean,
            serving_notes: None,
        }
    }

    pub fn http(base_url: impl Into<String>, model_id: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::HttpOpenaiCompatible,
            base_url: Some(base_url.into()),
            ..Self::mock(model_id)
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        let bad = |m: &str| Err(GatewayError::InvalidConfig(m.to_string()));
        if self.concurrency_limit == 0 {
            return bad("concurrency_limit must be at least 1");
        }
        if !(self.timeout_sec.is_finite() && self.timeout_sec > 0.0) {
            return bad("timeout_sec must be positive");
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be non-negative");
        }
        if self.max_output_tokens == 0 {
            return bad("max_output_tokens must be positive");
        }
        if self.model_id.trim().is_empty() {
            return bad("model_id is empty");
        }
        if self.kind == BackendKind::HttpOpenaiCompatible && self.base_url.as_deref().is_none_or(str::is_empty) {
            return bad("base_url is required for http_openai_compatible");
        }
        Ok(())
    }

    /// Upper bound of the jittered sleep before retry number `retry` (1-based).
    pub fn backoff_ceiling(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.saturating_sub(1)).unwrap_or(u64::MAX);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor).min(self.backoff_cap_ms))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GatewayError {
    #[error("invalid backend config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Timeout,
    Transport,
    HttpStatus,
    MalformedResponse,
}

impl ErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Timeout => "timeout",
            ErrorClass::Transport => "transport",
            ErrorClass::HttpStatus => "http_status",
            ErrorClass::MalformedResponse => "malformed_response",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCompletion {
    pub record_id: String,
    pub prompt_hash: String,
    pub content: String,
    pub model_id: String,
    pub latency_ms: u64,
    pub attempts: u32,
    pub status: CompletionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_class: Option<ErrorClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
}

impl RawCompletion {
    pub fn is_ok(&self) -> bool {
        self.status == CompletionStatus::Ok && !self.content.is_empty()
    }
}

/// Counts backend attempts; shared by every clone of the handle.
#[derive(Debug, Clone, Default)]
pub struct CallCounter(Arc<AtomicU64>);

impl CallCounter {
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }

    fn bump(&self) {
        self.0.fetch_add(1, Ordering::SeqCst);
    }
}

/// Sends prompts to one backend. Safe to share between tasks; the
/// concurrency limit applies across all batches run through one gateway.
pub struct Gateway {
    config: BackendConfig,
    backend: Arc<dyn Backend>,
    cache: Option<CompletionCache>,
    permits: Semaphore,
    calls: CallCounter,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("config", &self.config)
            .field("cache", &self.cache)
            .field("calls", &self.calls.get())
            .finish()
    }
}

impl Gateway {
    /// Builds the backend named by `config.kind`. The mock replies are keyed
    /// on `seed`.
    pub fn new(config: BackendConfig, seed: u64) -> Result<Self, GatewayError> {
        config.validate()?;
        let backend: Arc<dyn Backend> = match config.kind {
            BackendKind::Mock => Arc::new(MockBackend {
                seed,
                noise: config.mock_noise,
            }),
            BackendKind::HttpOpenaiCompatible => Arc::new(
                HttpBackend::new(&config).map_err(|e| GatewayError::InvalidConfig(e.message))?,
            ),
        };
        Ok(Self::assemble(config, backend))
    }

    pub fn with_backend(config: BackendConfig, backend: Arc<dyn Backend>) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(Self::assemble(config, backend))
    }

    fn assemble(config: BackendConfig, backend: Arc<dyn Backend>) -> Self {
        Self {
            permits: Semaphore::new(config.concurrency_limit),
            config,
            backend,
            cache: None,
            calls: CallCounter::default(),
        }
    }

    pub fn with_cache(mut self, cache: CompletionCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    pub fn cache(&self) -> Option<&CompletionCache> {
        self.cache.as_ref()
    }

    /// Number of requests handed to the backend so far, retries included.
    pub fn backend_calls(&self) -> u64 {
        self.calls.get()
    }

    pub fn call_counter(&self) -> CallCounter {
        self.calls.clone()
    }

    /// One prompt to one completion. Cache hits cost no backend call.
    pub async fn complete(&self, record_id: &str, prompt: &str) -> RawCompletion {
        let hash = prompt_hash(prompt);
        let cfg = &self.config;
        if let Some(mut hit) = self.cache.as_ref().and_then(|c| c.get(&cfg.model_id, cfg.temperature, &hash)) {
            hit.record_id = record_id.to_string();
            return hit;
        }

        let _permit = self.permits.acquire().await.expect("semaphore is never closed");
        let started = Instant::now();
        let timeout = Duration::from_secs_f64(cfg.timeout_sec);
        let mut attempts = 0;
        let outcome = loop {
            attempts += 1;
            self.calls.bump();
            let result = match tokio::time::timeout(timeout, self.backend.send(prompt)).await {
                Ok(Ok(text)) if text.is_empty() => Err(BackendError::new(
                    ErrorClass::MalformedResponse,
                    "empty message content",
                    false,
                )),
                Ok(r) => r,
                Err(_) => Err(BackendError::timeout()),
            };
            match result {
                Ok(text) => break Ok(text),
                Err(e) if e.retryable && attempts <= cfg.max_retries => {
                    let ceiling = cfg.backoff_ceiling(attempts).as_millis() as u64;
                    let wait = rand::rng().random_range(0..=ceiling);
                    tokio::time::sleep(Duration::from_millis(wait)).await;
                }
                Err(e) => break Err(e),
            }
        };
        let latency_ms = started.elapsed().as_millis() as u64;

        let completion = match outcome {
            Ok(content) => RawCompletion {
                record_id: record_id.to_string(),
                prompt_hash: hash,
                content,
                model_id: cfg.model_id.clone(),
                latency_ms,
                attempts,
                status: CompletionStatus::Ok,
                error_class: None,
                error_message: None,
            },
            Err(e) => RawCompletion {
                record_id: record_id.to_string(),
                prompt_hash: hash,
                content: String::new(),
                model_id: cfg.model_id.clone(),
                latency_ms,
                attempts,
                status: CompletionStatus::Failed,
                error_class: Some(e.class),
                error_message: Some(e.message),
            },
        };
        if completion.is_ok() {
            if let Some(cache) = &self.cache {
                // A failed cache write only costs a repeat call on the next run.
                let _ = cache.put(cfg.temperature, &completion);
            }
        }
        completion
    }

    /// One completion per `(record_id, prompt)`, returned in input order.
    /// At most `concurrency_limit` requests are in flight at once.
    pub async fn assess_batch(&self, prompts: &[(String, String)]) -> Vec<RawCompletion> {
        let pending: Vec<_> = prompts
            .iter()
            .enumerate()
            .map(|(i, (id, prompt))| async move { (i, self.complete(id, prompt).await) })
            .collect();
        let mut done: Vec<(usize, RawCompletion)> = stream::iter(pending)
            .buffer_unordered(self.config.concurrency_limit)
            .collect()
            .await;
        done.sort_by_key(|(i, _)| *i);
        done.into_iter().map(|(_, c)| c).collect()
    }
}
