use std::ops::AddAssign;
use std::thread;
use std::time::Duration;

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }
}

/// Chat-completions request body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl AddAssign for TokenUsage {
    fn add_assign(&mut self, rhs: Self) {
        self.input_tokens += rhs.input_tokens;
        self.output_tokens += rhs.output_tokens;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub usage: TokenUsage,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EndpointError {
    /// Worth retrying: timeouts, rate limits, 5xx.
    #[error("transient endpoint error: {0}")]
    Transient(String),
    #[error("endpoint error: {0}")]
    Fatal(String),
}

/// Anything that answers chat-completion requests.
pub trait ChatEndpoint: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError>;
}

impl<T: ChatEndpoint + ?Sized> ChatEndpoint for &T {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExchangeStatus {
    Ok,
    Retried(u32),
    Failed,
}

/// One request/response pair as it went over the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub request: Vec<ChatMessage>,
    pub response_text: String,
    pub usage: Option<TokenUsage>,
    pub status: ExchangeStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 5,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    /// Full-jitter exponential backoff for the given retry (0-based).
    pub fn delay(&self, retry: u32) -> Duration {
        let cap = self
            .base_delay
            .saturating_mul(1u32.checked_shl(retry).unwrap_or(u32::MAX))
            .min(self.max_delay);
        if cap.is_zero() {
            return cap;
        }
        let nanos = rand::rng().random_range(0..=cap.as_nanos() as u64);
        Duration::from_nanos(nanos)
    }
}

/// Sends a request, retrying transient failures. Returns the exchange and
/// the number of attempts made; fatal errors are not retried.
pub fn send_with_retries(
    endpoint: &dyn ChatEndpoint,
    request: &ChatRequest,
    policy: &RetryPolicy,
) -> Result<(ChatExchange, u32), (EndpointError, u32)> {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match endpoint.complete(request) {
            Ok(response) => {
                let status = if attempt == 1 {
                    ExchangeStatus::Ok
                } else {
                    ExchangeStatus::Retried(attempt - 1)
                };
                return Ok((
                    ChatExchange {
                        request: request.messages.clone(),
                        response_text: response.text,
                        usage: Some(response.usage),
                        status,
                    },
                    attempt,
                ));
            }
            Err(EndpointError::Transient(msg)) if attempt <= policy.max_retries => {
                let delay = policy.delay(attempt - 1);
                warn!("attempt {attempt} failed ({msg}); retrying in {delay:?}");
                thread::sleep(delay);
            }
            Err(e) => return Err((e, attempt)),
        }
    }
}
