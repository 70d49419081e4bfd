use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use super::{HumanEvalError, JudgmentInput, SessionStore};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: SocketAddr,
    pub data_dir: PathBuf,
    /// Directory of annotation UI assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl From<HumanEvalError> for ApiError {
    fn from(e: HumanEvalError) -> Self {
        let status = match &e {
            HumanEvalError::CorrectionRequired | HumanEvalError::CorrectionNotAllowed | HumanEvalError::Invalid(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            HumanEvalError::NotFound(_) => StatusCode::NOT_FOUND,
            HumanEvalError::Unauthorized => StatusCode::UNAUTHORIZED,
            HumanEvalError::EmptySession | HumanEvalError::SessionExists(_) => StatusCode::CONFLICT,
            HumanEvalError::InsufficientPool { .. } => StatusCode::BAD_REQUEST,
            HumanEvalError::Storage { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            log::error!("{e}");
        }
        ApiError {
            status,
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "invalid_body",
            message: e.body_text(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code,
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn bearer(headers: &HeaderMap) -> Result<&str, ApiError> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .ok_or_else(|| HumanEvalError::Unauthorized.into())
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: Option<String>,
}

async fn next_item(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    Query(query): Query<NextQuery>,
    headers: HeaderMap,
) -> ApiResult<super::NextItem> {
    let token = bearer(&headers)?;
    let annotator = store.authenticate(&id, token, query.annotator.as_deref())?;
    Ok(Json(store.next_item(&id, &annotator)?))
}

async fn submit(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<JudgmentInput>, JsonRejection>,
) -> ApiResult<super::SubmitOutcome> {
    let token = bearer(&headers)?;
    let annotator = store.authenticate(&id, token, None)?;
    let Json(input) = body?;
    let outcome = tokio::task::spawn_blocking(move || store.submit(&id, &annotator, input))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "internal",
            message: e.to_string(),
        })??;
    Ok(Json(outcome))
}

async fn report(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<super::AggregateReport> {
    let token = bearer(&headers)?;
    if !store.is_admin(&id, token)? {
        return Err(HumanEvalError::Unauthorized.into());
    }
    Ok(Json(store.report(&id)?))
}

async fn health() -> &'static str {
    "ok"
}

/// Builds the API router; `static_dir`, when given, is served for every
/// path the API does not claim.
pub fn router(store: Arc<SessionStore>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/healthz", get(health))
        .route("/sessions/{id}/next", get(next_item))
        .route("/sessions/{id}/judgments", post(submit))
        .route("/sessions/{id}/report", get(report))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api,
    }
}

/// Serves the API until the process is stopped.
pub async fn serve(config: ServerConfig) -> std::io::Result<()> {
    let store = SessionStore::open(&config.data_dir).map_err(std::io::Error::other)?;
    log::info!(
        "serving {} session(s) from {} on http://{}",
        store.session_ids().len(),
        config.data_dir.display(),
        config.bind
    );
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    axum::serve(listener, router(Arc::new(store), config.static_dir)).await
}
