use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use wellspeech_core::mock::{mock_reply, MockNoise};

use super::{BackendConfig, ErrorClass};

/// Name of the environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "WB_API_KEY";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{class}: {message}")]
pub struct BackendError {
    pub class: ErrorClass,
    pub message: String,
    pub retryable: bool,
}

impl BackendError {
    pub fn new(class: ErrorClass, message: impl Into<String>, retryable: bool) -> Self {
        Self {
            class,
            message: message.into(),
            retryable,
        }
    }

    pub fn timeout() -> Self {
        Self::new(ErrorClass::Timeout, "request timed out", true)
    }
}

/// One attempt at turning a prompt into model text. Retries, timeouts, and
/// caching are handled by the gateway around it.
#[async_trait]
pub trait Backend: Send + Sync {
    async fn send(&self, prompt: &str) -> Result<String, BackendError>;
}

/// Replies with [`mock_reply`]; never fails.
#[derive(Debug, Clone)]
pub struct MockBackend {
    pub seed: u64,
    pub noise: MockNoise,
}

#[async_trait]
impl Backend for MockBackend {
    async fn send(&self, prompt: &str) -> Result<String, BackendError> {
        Ok(mock_reply(prompt, self.seed, self.noise))
    }
}

/// Client for an OpenAI-compatible `/v1/chat/completions` endpoint.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    client: reqwest::Client,
    url: String,
    model: String,
    temperature: f64,
    max_tokens: u32,
    api_key: Option<String>,
}

#[derive(Debug, Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<Value>,
}

impl HttpBackend {
    pub fn new(config: &BackendConfig) -> Result<Self, BackendError> {
        let base = config
            .base_url
            .as_deref()
            .ok_or_else(|| BackendError::new(ErrorClass::Transport, "base_url is required for http backends", false))?;
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_sec))
            .build()
            .map_err(|e| BackendError::new(ErrorClass::Transport, e.to_string(), false))?;
        Ok(Self {
            client,
            url: format!("{}/v1/chat/completions", base.trim_end_matches('/')),
            model: config.model_id.clone(),
            temperature: config.temperature,
            max_tokens: config.max_output_tokens,
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

/// Message text from a chat-completions body. Array-of-parts content is
/// flattened to its text parts.
fn message_text(content: Option<Value>) -> Option<String> {
    match content? {
        Value::String(s) => Some(s),
        Value::Array(parts) => Some(
            parts
                .iter()
                .filter_map(|p| p.get("text").and_then(Value::as_str))
                .collect::<Vec<_>>()
                .join(""),
        ),
        _ => None,
    }
}

#[async_trait]
impl Backend for HttpBackend {
    async fn send(&self, prompt: &str) -> Result<String, BackendError> {
        let body = ChatRequest {
            model: &self.model,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        };
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().await.map_err(|e| {
            if e.is_timeout() {
                BackendError::timeout()
            } else {
                BackendError::new(ErrorClass::Transport, e.to_string(), true)
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            let retryable = status.as_u16() == 429 || status.is_server_error();
            return Err(BackendError::new(
                ErrorClass::HttpStatus,
                format!("HTTP {}", status.as_u16()),
                retryable,
            ));
        }
        let bytes = resp.bytes().await.map_err(|e| {
            if e.is_timeout() {
                BackendError::timeout()
            } else {
                BackendError::new(ErrorClass::Transport, e.to_string(), true)
            }
        })?;
        let parsed: ChatResponse = serde_json::from_slice(&bytes)
            .map_err(|e| BackendError::new(ErrorClass::MalformedResponse, e.to_string(), false))?;
        let text = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| message_text(c.message.content))
            .filter(|t| !t.is_empty())
            .ok_or_else(|| BackendError::new(ErrorClass::MalformedResponse, "no message content in choices[0]", false))?;
        Ok(text)
    }
}

/// Body of a minimal chat-completions reply, for servers and tests.
pub fn chat_completion_body(model: &str, content: &str) -> Value {
    json!({
        "id": "chatcmpl-local",
        "object": "chat.completion",
        "model": model,
        "choices": [{
            "index": 0,
            "message": {"role": "assistant", "content": content},
            "finish_reason": "stop"
        }]
    })
}
