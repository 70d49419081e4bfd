mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use mixaug_core::generation::{
    send_with_retries, ChatEndpoint, ChatMessage, ChatRequest, EndpointError, OpenAiCompatibleClient, RetryPolicy,
};
use mixaug_core::translate::{HttpTranslator, Translator};
use serde_json::{json, Value};

#[derive(Clone, Default)]
struct Counter(Arc<AtomicUsize>);

async fn chat(State(calls): State<Counter>, headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    let n = calls.0.fetch_add(1, Ordering::SeqCst);
    let prompt = body["messages"][0]["content"].as_str().unwrap_or_default().to_string();
    if prompt.contains("flaky") && n == 0 {
        return (StatusCode::TOO_MANY_REQUESTS, Json(json!({"error": "slow down"})));
    }
    if prompt.contains("bad request") {
        return (StatusCode::BAD_REQUEST, Json(json!({"error": "nope"})));
    }
    let auth = headers.get("authorization").and_then(|v| v.to_str().ok()).unwrap_or("");
    (
        StatusCode::OK,
        Json(json!({
            "choices": [{"message": {"role": "assistant", "content": format!("echo[{auth}]: {prompt}")}}],
            "usage": {"prompt_tokens": 12, "completion_tokens": 7},
            "model": body["model"],
        })),
    )
}

fn request(content: &str) -> ChatRequest {
    ChatRequest {
        model: "test-model".into(),
        messages: vec![ChatMessage::user(content)],
        temperature: 0.6,
    }
}

fn chat_server() -> (String, Counter) {
    let calls = Counter::default();
    let app = Router::new()
        .route("/v1/chat/completions", post(chat))
        .with_state(calls.clone());
    (format!("{}/v1/chat/completions", common::spawn(app)), calls)
}

#[test]
fn chat_client_parses_replies_and_usage() {
    let (url, _) = chat_server();
    let client = OpenAiCompatibleClient::new(url, Some("sk-test".into()), Duration::from_secs(5));
    let reply = client.complete(&request("hello")).unwrap();
    assert_eq!(reply.text, "echo[Bearer sk-test]: hello");
    assert_eq!((reply.usage.input_tokens, reply.usage.output_tokens), (12, 7));
}

#[test]
fn chat_client_classifies_status_codes() {
    let (url, calls) = chat_server();
    let client = OpenAiCompatibleClient::new(url, None, Duration::from_secs(5));
    assert!(matches!(
        client.complete(&request("flaky")),
        Err(EndpointError::Transient(_))
    ));
    assert!(matches!(
        client.complete(&request("bad request")),
        Err(EndpointError::Fatal(_))
    ));
    assert_eq!(calls.0.load(Ordering::SeqCst), 2);
}

#[test]
fn rate_limits_are_retried() {
    let (url, calls) = chat_server();
    let client = OpenAiCompatibleClient::new(url, None, Duration::from_secs(5));
    let policy = RetryPolicy {
        max_retries: 3,
        base_delay: Duration::from_millis(1),
        max_delay: Duration::from_millis(5),
    };
    let (exchange, attempts) = send_with_retries(&client, &request("flaky"), &policy).unwrap();
    assert_eq!(attempts, 2);
    assert!(exchange.response_text.ends_with("flaky"));
    assert_eq!(calls.0.load(Ordering::SeqCst), 2);
}

#[test]
fn unreachable_endpoint_is_transient() {
    let client = OpenAiCompatibleClient::new("http://127.0.0.1:9/none", None, Duration::from_millis(500));
    assert!(matches!(
        client.complete(&request("x")),
        Err(EndpointError::Transient(_))
    ));
}

async fn translate(Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    let text = body["text"].as_str().unwrap_or_default();
    if text.contains("fail") {
        return (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({})));
    }
    let out = format!(
        "[{}>{}] {}",
        body["source"].as_str().unwrap(),
        body["target"].as_str().unwrap(),
        text.to_uppercase()
    );
    (StatusCode::OK, Json(json!({ "translation": out })))
}

#[test]
fn http_translator_round_trip() {
    let base = common::spawn(Router::new().route("/translate", post(translate)));
    let mt = HttpTranslator::new(format!("{base}/translate"), Duration::from_secs(5));
    assert_eq!(mt.translate("i love it", "en", "es").unwrap(), "[en>es] I LOVE IT");
    assert!(mt.translate("please fail", "en", "es").is_err());
}
