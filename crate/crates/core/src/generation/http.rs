use std::time::Duration;

use serde::Deserialize;

use super::endpoint::{ChatEndpoint, ChatRequest, ChatResponse, EndpointError, TokenUsage};

/// Blocking client for the de-facto chat-completions wire format.
pub struct OpenAiCompatibleClient {
    url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

impl OpenAiCompatibleClient {
    /// `url` is the full chat-completions URL, e.g.
    /// `https://api.openai.com/v1/chat/completions`.
    pub fn new(url: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            url: url.into(),
            api_key,
            agent,
        }
    }
}

fn classify_status(status: u16, body: &str) -> EndpointError {
    let msg = format!("HTTP {status}: {}", body.chars().take(300).collect::<String>());
    if status == 429 || status == 408 || status >= 500 {
        EndpointError::Transient(msg)
    } else {
        EndpointError::Fatal(msg)
    }
}

impl ChatEndpoint for OpenAiCompatibleClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError> {
        let mut call = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call
            .send_json(request)
            .map_err(|e| EndpointError::Transient(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| EndpointError::Transient(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(classify_status(status, &body));
        }
        let wire: WireResponse =
            serde_json::from_str(&body).map_err(|e| EndpointError::Fatal(format!("malformed response: {e}")))?;
        let text = wire
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| EndpointError::Fatal("response has no message content".into()))?;
        let usage = wire
            .usage
            .map(|u| TokenUsage {
                input_tokens: u.prompt_tokens,
                output_tokens: u.completion_tokens,
            })
            .ok_or_else(|| EndpointError::Fatal("response has no usage block".into()))?;
        Ok(ChatResponse { text, usage })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_classification() {
        assert!(matches!(classify_status(429, ""), EndpointError::Transient(_)));
        assert!(matches!(classify_status(503, ""), EndpointError::Transient(_)));
        assert!(matches!(classify_status(401, "no key"), EndpointError::Fatal(_)));
    }
}
