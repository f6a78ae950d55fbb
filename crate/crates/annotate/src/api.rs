use std::future::Future;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use crate::guidelines::Guidelines;
use crate::store::{AnnotationStore, StoreError, Submission};

#[derive(Clone)]
struct AppState {
    store: Arc<AnnotationStore>,
    guidelines: Arc<Guidelines>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub revision: u64,
}

struct ApiError(StoreError);

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            StoreError::UnknownAnnotator(_) | StoreError::UnknownPair(_) | StoreError::UnknownEval(_) => {
                StatusCode::NOT_FOUND
            }
            StoreError::InvalidLabel(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: String,
}

#[derive(Deserialize)]
struct ExportQuery {
    eval: String,
}

async fn next(State(s): State<AppState>, Query(q): Query<NextQuery>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(s.store.next_question(&q.annotator)?))
}

async fn submit(State(s): State<AppState>, Json(sub): Json<Submission>) -> Result<impl IntoResponse, ApiError> {
    let store = s.store.clone();
    // The write path fsyncs; keep it off the async workers.
    let revision = tokio::task::spawn_blocking(move || store.record(sub))
        .await
        .expect("record task panicked")?;
    Ok(Json(SubmitResponse { revision }))
}

async fn export(State(s): State<AppState>, Query(q): Query<ExportQuery>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(s.store.export_for(&q.eval)?))
}

async fn progress(State(s): State<AppState>) -> impl IntoResponse {
    Json(s.store.progress())
}

async fn guidelines(State(s): State<AppState>) -> impl IntoResponse {
    Json(s.guidelines.as_ref().clone())
}

pub fn router(store: Arc<AnnotationStore>, guidelines_text: Guidelines) -> Router {
    Router::new()
        .route("/api/next", get(next))
        .route("/api/annotations", post(submit))
        .route("/api/export", get(export))
        .route("/api/progress", get(progress))
        .route("/api/guidelines", get(guidelines))
        .with_state(AppState { store, guidelines: Arc::new(guidelines_text) })
}

/// Serves `app` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}
