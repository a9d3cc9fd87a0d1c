//! `/api/v1` HTTP surface.
//!
//! Consumers identify themselves with `Authorization: Bearer <token>` or
//! `X-Consumer-Id: <token>`. Reads without an identity use the default
//! consumer state; writes require one.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tablecheck_core::appraisal::{Adjustment, AdjustmentError, AppraisalError, ConsumerState, Whitelist};
use tower_http::cors::CorsLayer;

use crate::engine::{Engine, EngineError};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let status = match &e {
            _ if e.is_not_found() => StatusCode::NOT_FOUND,
            EngineError::Adjustment(AdjustmentError::Appraisal(a)) | EngineError::Appraisal(a) => match a {
                AppraisalError::InvalidTable(_) => StatusCode::INTERNAL_SERVER_ERROR,
                _ => StatusCode::BAD_REQUEST,
            },
            EngineError::Adjustment(AdjustmentError::UnknownIssue(_)) => StatusCode::NOT_FOUND,
            EngineError::Adjustment(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %e, "request failed");
        }
        ApiError::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn consumer_id(headers: &HeaderMap) -> Option<String> {
    let bearer =
        headers.get("authorization").and_then(|v| v.to_str().ok()).and_then(|v| v.strip_prefix("Bearer ")).map(str::trim);
    let header = headers.get("x-consumer-id").and_then(|v| v.to_str().ok()).map(str::trim);
    bearer.or(header).filter(|s| !s.is_empty()).map(str::to_string)
}

fn require_consumer(headers: &HeaderMap) -> Result<String, ApiError> {
    consumer_id(headers).ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "consumer identity required"))
}

fn consumer_state(engine: &Engine, headers: &HeaderMap) -> Result<ConsumerState, ApiError> {
    match consumer_id(headers) {
        Some(id) => Ok(engine.consumer(&id)?),
        None => Ok(ConsumerState::default()),
    }
}

fn parse_now(raw: Option<&str>) -> Result<DateTime<Utc>, ApiError> {
    match raw {
        None => Ok(Utc::now()),
        Some(s) => DateTime::parse_from_rfc3339(s)
            .map(|d| d.with_timezone(&Utc))
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("invalid now {s:?}: {e}"))),
    }
}

#[derive(Debug, Deserialize)]
pub struct NowQuery {
    now: Option<String>,
}

async fn list_tables(State(engine): State<Arc<Engine>>) -> ApiResult<Vec<crate::engine::TableSummary>> {
    Ok(Json(engine.tables()?))
}

async fn report(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    Query(q): Query<NowQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let now = parse_now(q.now.as_deref())?;
    let consumer = consumer_state(&engine, &headers)?;
    let report = engine.report(&id, &consumer, now).await?;
    Ok(([("content-type", "application/json")], report.to_json()).into_response())
}

async fn timeline(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<crate::engine::TimelineView> {
    let consumer = consumer_state(&engine, &headers)?;
    Ok(Json(engine.timeline(&id, &consumer.thresholds)?))
}

async fn alternatives(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<tablecheck_core::appraisal::Fetched<Vec<tablecheck_core::appraisal::Alternative>>> {
    let consumer = consumer_state(&engine, &headers)?;
    Ok(Json(engine.alternatives(&id, &consumer.thresholds).await?))
}

async fn snapshot(
    State(engine): State<Arc<Engine>>,
    Path((id, sid)): Path<(String, String)>,
) -> ApiResult<tablecheck_core::ContextSnapshot> {
    Ok(Json(engine.snapshot(&id, &sid)?))
}

async fn get_whitelist(State(engine): State<Arc<Engine>>, headers: HeaderMap) -> ApiResult<Whitelist> {
    Ok(Json(consumer_state(&engine, &headers)?.whitelist))
}

#[derive(Debug, Deserialize)]
pub struct WhitelistBody {
    pub domains: Vec<String>,
}

async fn put_whitelist(
    State(engine): State<Arc<Engine>>,
    headers: HeaderMap,
    body: Result<Json<WhitelistBody>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Whitelist> {
    let id = require_consumer(&headers)?;
    let Json(body) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.body_text()))?;
    Ok(Json(engine.set_whitelist(&id, &body.domains).await?.whitelist))
}

#[derive(Debug, Deserialize)]
pub struct AdjustmentBody {
    pub table_id: String,
    pub adjustment: Adjustment,
    #[serde(default)]
    pub now: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct AdjustmentResponse {
    pub consumer: ConsumerState,
    pub report: tablecheck_core::appraisal::AppraisalReport,
}

async fn post_adjustment(
    State(engine): State<Arc<Engine>>,
    headers: HeaderMap,
    body: Result<Json<AdjustmentBody>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<AdjustmentResponse> {
    let id = require_consumer(&headers)?;
    let Json(body) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.body_text()))?;
    let now = parse_now(body.now.as_deref())?;
    let (consumer, report) = engine.adjust(&id, &body.table_id, &body.adjustment, now).await?;
    Ok(Json(AdjustmentResponse { consumer, report }))
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such endpoint")
}

pub fn router(engine: Arc<Engine>) -> Router {
    let api = Router::new()
        .route("/tables", get(list_tables))
        .route("/tables/{id}/report", get(report))
        .route("/tables/{id}/timeline", get(timeline))
        .route("/tables/{id}/alternatives", get(alternatives))
        .route("/tables/{id}/snippets/{sid}/snapshot", get(snapshot))
        .route("/consumer/whitelist", get(get_whitelist).put(put_whitelist))
        .route("/consumer/adjustments", post(post_adjustment));
    Router::new().nest("/api/v1", api).fallback(fallback).layer(CorsLayer::permissive()).with_state(engine)
}
