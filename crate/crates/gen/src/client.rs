//! Chat-completions backends.

use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-request sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RequestParams {
    pub temperature: f32,
    pub max_tokens: u32,
}

impl Default for RequestParams {
    fn default() -> Self {
        RequestParams {
            temperature: 1.0,
            max_tokens: 1024,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RequestError {
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("rate limited")]
    Throttled { retry_after: Option<Duration> },
    #[error("server error {status}: {body}")]
    Server { status: u16, body: String },
    #[error("request rejected {status}: {body}")]
    Client { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("unexpected response: {0}")]
    Malformed(String),
}

impl RequestError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            RequestError::Throttled { .. } | RequestError::Server { .. } | RequestError::Transport(_)
        )
    }
}

/// Something that turns one user prompt into one completion.
#[async_trait]
pub trait CompletionBackend: Send + Sync {
    async fn complete(&self, prompt: &str, params: &RequestParams) -> Result<String, RequestError>;
}

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_API_KEY_VAR: &str = "OPENAI_API_KEY";

/// OpenAI-compatible `POST {base_url}/chat/completions` client. One user
/// message per request, no system message.
pub struct ChatClient {
    http: reqwest::Client,
    endpoint: String,
    api_key: String,
    model: String,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f32,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

#[derive(Debug, Error)]
#[error("environment variable {0} is not set")]
pub struct MissingCredentials(pub String);

impl ChatClient {
    pub fn new(base_url: &str, api_key: impl Into<String>, model: impl Into<String>) -> Self {
        ChatClient {
            http: reqwest::Client::new(),
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            api_key: api_key.into(),
            model: model.into(),
        }
    }

    /// Reads the API key from `key_var`.
    pub fn from_env(base_url: &str, key_var: &str, model: impl Into<String>) -> Result<Self, MissingCredentials> {
        let key = std::env::var(key_var).map_err(|_| MissingCredentials(key_var.to_string()))?;
        Ok(Self::new(base_url, key, model))
    }

    pub fn model(&self) -> &str {
        &self.model
    }
}

fn retry_after(headers: &reqwest::header::HeaderMap) -> Option<Duration> {
    headers
        .get(reqwest::header::RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|s| s.is_finite() && *s >= 0.0)
        .map(Duration::from_secs_f64)
}

#[async_trait]
impl CompletionBackend for ChatClient {
    async fn complete(&self, prompt: &str, params: &RequestParams) -> Result<String, RequestError> {
        let body = ChatRequest {
            model: &self.model,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: params.temperature,
            max_tokens: params.max_tokens,
        };
        let response = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .await
            .map_err(|e| RequestError::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let wait = retry_after(response.headers());
            let text = response.text().await.unwrap_or_default();
            return Err(match status.as_u16() {
                401 | 403 => RequestError::Auth(text),
                429 => RequestError::Throttled { retry_after: wait },
                s if s >= 500 => RequestError::Server { status: s, body: text },
                s => RequestError::Client { status: s, body: text },
            });
        }
        let parsed: ChatResponse = response
            .json()
            .await
            .map_err(|e| RequestError::Malformed(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| RequestError::Malformed("no message content in first choice".into()))
    }
}
