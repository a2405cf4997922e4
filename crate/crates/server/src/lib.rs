//! HTTP/JSON service over the synthesis operations.
//!
//! Every compute endpoint runs its operation on the blocking pool; the async
//! runtime only parses, dispatches and serializes.

use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tokio::net::TcpListener;

use qsynth_core::api::{self, ApiError, ErrorKind};
use qsynth_core::experiments::{CoveringConfig, LiouvilleConfig, ScalingConfig};

/// JSON error body: `{"kind": "...", "message": "..."}`.
pub struct Failure(StatusCode, ApiError);

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        let status = match e.kind {
            ErrorKind::Invalid => StatusCode::BAD_REQUEST,
            ErrorKind::Unsatisfiable => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Failure(status, e)
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type Reply<T> = Result<Json<T>, Failure>;

async fn run<Req, Resp, F>(body: Result<Json<Req>, JsonRejection>, op: F) -> Reply<Resp>
where
    Req: DeserializeOwned + Send + 'static,
    Resp: Serialize + Send + 'static,
    F: FnOnce(&Req) -> Result<Resp, ApiError> + Send + 'static,
{
    let Json(req) = body.map_err(|e| Failure::from(ApiError::invalid(e.body_text())))?;
    let out = tokio::task::spawn_blocking(move || op(&req))
        .await
        .map_err(|e| Failure(StatusCode::INTERNAL_SERVER_ERROR, ApiError { kind: ErrorKind::Internal, message: e.to_string() }))?;
    out.map(Json).map_err(Failure::from)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/synth/exact", post(|b: Result<Json<api::ExactSynthRequest>, _>| run(b, api::synth_exact)))
        .route("/v1/synth/approx", post(|b: Result<Json<api::ApproxRequest>, _>| run(b, api::synth_approx)))
        .route("/v1/prob-synth", post(|b: Result<Json<api::ApproxRequest>, _>| run(b, api::prob_synth)))
        .route("/v1/enumerate", post(|b: Result<Json<api::EnumerateRequest>, _>| run(b, api::enumerate)))
        .route("/v1/experiment/scaling", post(|b: Result<Json<ScalingConfig>, _>| run(b, api::experiment_scaling)))
        .route("/v1/experiment/liouville", post(|b: Result<Json<LiouvilleConfig>, _>| run(b, api::experiment_liouville)))
        .route("/v1/experiment/covering", post(|b: Result<Json<CoveringConfig>, _>| run(b, api::experiment_covering)))
}

/// Serves until the listener fails or the future is dropped.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

/// Binds `addr` (port 0 picks a free port) and serves in a background task.
pub async fn spawn(addr: &str) -> std::io::Result<std::net::SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(e) = serve(listener).await {
            tracing::error!("server stopped: {e}");
        }
    });
    Ok(local)
}
