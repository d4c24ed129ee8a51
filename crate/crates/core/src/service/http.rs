use std::collections::HashMap;
use std::future::Future;
use std::io;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::RwLock;
use serde_json::{json, Value};
use tokio::net::TcpListener;

use super::{Pipeline, PipelineError};
use crate::forecast::{ForecastError, Period};
use crate::ik::IkObservation;
use crate::ingest::IngestError;

pub type SharedPipeline = Arc<RwLock<Pipeline>>;

fn status_of(e: &PipelineError) -> StatusCode {
    match e {
        PipelineError::UnknownRegion(_) | PipelineError::Forecast(ForecastError::NoData { .. }) => StatusCode::NOT_FOUND,
        PipelineError::OutOfOrder { .. } | PipelineError::DuplicateObservation(_) => StatusCode::CONFLICT,
        PipelineError::Forecast(ForecastError::InsufficientBaseline { .. }) => StatusCode::SERVICE_UNAVAILABLE,
        PipelineError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

/// `{"error": <name>, <detail key>: <detail>, "message": <text>}`.
pub fn error_body(e: &PipelineError) -> Value {
    let mut body = json!({ "error": e.name(), "message": e.to_string() });
    if let Some((k, v)) = e.detail() {
        body[k] = Value::String(v);
    }
    body
}

struct ApiError(PipelineError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (status_of(&self.0), Json(error_body(&self.0))).into_response()
    }
}

impl<E: Into<PipelineError>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

async fn post_observation(State(state): State<SharedPipeline>, body: String) -> Result<Json<Value>, ApiError> {
    let mut p = state.write();
    let acc = p.ingest_json(&body)?;
    p.sync_journal()?;
    Ok(Json(json!({
        "status": "accepted",
        "region": acc.region,
        "id": acc.observation.map(|i| i.to_string()),
        "event_id": acc.event_id.0,
        "firings": acc.firings,
    })))
}

async fn post_ik(State(state): State<SharedPipeline>, body: String) -> Result<Json<Value>, ApiError> {
    let obs: IkObservation = serde_json::from_str(&body).map_err(|e| IngestError::Malformed(e.to_string()))?;
    let mut p = state.write();
    let acc = p.ingest_ik(obs)?;
    p.sync_journal()?;
    Ok(Json(json!({
        "status": "accepted",
        "region": acc.region,
        "event_id": acc.event_id.0,
        "firings": acc.firings,
    })))
}

async fn get_forecast(State(state): State<SharedPipeline>, Query(q): Query<HashMap<String, String>>) -> Result<Json<Value>, ApiError> {
    let region = q.get("region").ok_or_else(|| IngestError::MissingKey("region".into()))?;
    let period: Period = q.get("period").ok_or_else(|| IngestError::MissingKey("period".into()))?.parse()?;
    let bulletin = state.read().forecast(region, period)?;
    Ok(Json(serde_json::to_value(bulletin).map_err(|e| PipelineError::Invalid(e.to_string()))?))
}

async fn get_rules(State(state): State<SharedPipeline>) -> Json<Value> {
    Json(json!({ "rules": state.read().rule_texts() }))
}

async fn get_health(State(state): State<SharedPipeline>) -> Json<Value> {
    Json(json!({ "status": "ok", "events": state.read().event_count() }))
}

pub fn router(state: SharedPipeline) -> Router {
    Router::new()
        .route("/observations", post(post_observation))
        .route("/ik", post(post_ik))
        .route("/forecast", get(get_forecast))
        .route("/rules", get(get_rules))
        .route("/health", get(get_health))
        .with_state(state)
}

/// Serves until `shutdown` resolves, then writes persistence snapshots.
pub async fn serve(state: SharedPipeline, listener: TcpListener, shutdown: impl Future<Output = ()> + Send + 'static) -> io::Result<()> {
    axum::serve(listener, router(state.clone())).with_graceful_shutdown(shutdown).await?;
    state.write().persist().map_err(|e| io::Error::other(e.to_string()))
}
