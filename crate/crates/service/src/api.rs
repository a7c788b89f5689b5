use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use bizrec_core::case::TaxonomyNode;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::session::{CreateSession, RecommendationPage, SelectRequest, SessionView, Solution};
use crate::{AppState, DEFAULT_LIMIT};

type Shared = State<Arc<AppState>>;

#[derive(Debug, Deserialize)]
struct PageParams {
    limit: Option<usize>,
}

#[derive(Debug, Serialize)]
struct TaxonomyResponse {
    taxonomy: TaxonomyNode,
}

#[derive(Debug, Serialize)]
struct ProcessEntry {
    name: String,
    cases: usize,
}

#[derive(Debug, Serialize)]
struct ProcessesResponse {
    processes: Vec<ProcessEntry>,
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn create_session(
    State(state): Shared,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req = body(payload)?;
    Ok((StatusCode::CREATED, Json(state.create_session(&req)?)))
}

async fn recommendations(
    State(state): Shared,
    Path(id): Path<String>,
    params: Result<Query<PageParams>, QueryRejection>,
) -> Result<Json<RecommendationPage>, ApiError> {
    let Query(params) = params.map_err(|e| ApiError::invalid_field("invalid_limit", "limit", e.body_text()))?;
    let limit = params.limit.unwrap_or(DEFAULT_LIMIT);
    // Snapshot under the lock, rank outside it.
    let session = state.with_session(&id, |s| Ok(s.clone()))?;
    Ok(Json(state.engine().recommend(&session, limit)?))
}

async fn select(
    State(state): Shared,
    Path(id): Path<String>,
    payload: Result<Json<SelectRequest>, JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let req = body(payload)?;
    Ok(Json(state.select(&id, &req.elements)?))
}

async fn solution(State(state): Shared, Path(id): Path<String>) -> Result<Json<Solution>, ApiError> {
    Ok(Json(state.with_session(&id, |s| Ok(s.solution()))?))
}

async fn taxonomy(State(state): Shared) -> Json<TaxonomyResponse> {
    Json(TaxonomyResponse { taxonomy: state.engine().taxonomy().clone() })
}

async fn processes(State(state): Shared) -> Json<ProcessesResponse> {
    let counts: BTreeMap<String, usize> = state.engine().process_counts();
    Json(ProcessesResponse { processes: counts.into_iter().map(|(name, cases)| ProcessEntry { name, cases }).collect() })
}

async fn not_found() -> ApiError {
    ApiError::not_found("no such route")
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/recommendations", get(recommendations))
        .route("/sessions/{id}/selections", post(select))
        .route("/sessions/{id}/solution", get(solution))
        .route("/meta/taxonomy", get(taxonomy))
        .route("/meta/processes", get(processes))
        .fallback(not_found)
        .with_state(state)
}
