//! JSON over HTTP.
//!
//! Requests may carry an `x-now` header (unix seconds) that fixes the clock
//! used for post ages and event timestamps.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fedfeed_core::corpus::Timestamp;
use fedfeed_core::fedsim::FedRunConfig;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::service::{ApiError, ErrorKind, FeedbackRequest, InteractionRequest, Service};

pub const NOW_HEADER: &str = "x-now";
pub const DEFAULT_LIMIT: usize = 20;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.kind {
            ErrorKind::BadRequest => StatusCode::BAD_REQUEST,
            ErrorKind::NotFound => StatusCode::NOT_FOUND,
            ErrorKind::Conflict => StatusCode::CONFLICT,
            ErrorKind::Unprocessable => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

type Shared = Arc<Service>;
type Reply<T> = Result<Json<T>, ApiError>;

fn now_from(headers: &HeaderMap) -> Result<Option<Timestamp>, ApiError> {
    match headers.get(NOW_HEADER) {
        None => Ok(None),
        Some(v) => v
            .to_str()
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .map(Some)
            .ok_or_else(|| ApiError::bad_request(format!("{NOW_HEADER} must be unix seconds"))),
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid body: {e}")))
}

#[derive(Deserialize)]
struct FeedQuery {
    limit: Option<String>,
}

async fn feed(
    State(svc): State<Shared>,
    Path(user): Path<String>,
    Query(q): Query<FeedQuery>,
    headers: HeaderMap,
) -> Reply<crate::service::FeedPage> {
    let limit = match q.limit {
        None => DEFAULT_LIMIT,
        Some(s) => s.parse::<usize>().map_err(|_| {
            ApiError::bad_request(format!("limit must be a non-negative integer, got {s:?}"))
        })?,
    };
    Ok(Json(svc.feed(&user, limit, now_from(&headers)?)?))
}

async fn feedback(
    State(svc): State<Shared>,
    headers: HeaderMap,
    body: Bytes,
) -> Reply<crate::service::FeedbackResponse> {
    let req: FeedbackRequest = parse_body(&body)?;
    Ok(Json(svc.feedback(&req, now_from(&headers)?)?))
}

async fn events(
    State(svc): State<Shared>,
    headers: HeaderMap,
    body: Bytes,
) -> Reply<crate::service::EventAck> {
    let req: InteractionRequest = parse_body(&body)?;
    Ok(Json(svc.record_interaction(&req, now_from(&headers)?)?))
}

#[derive(Deserialize)]
struct QuestionBody {
    question: String,
}

async fn video_query(
    State(svc): State<Shared>,
    Path(video): Path<String>,
    body: Bytes,
) -> Reply<fedfeed_core::vidquery::QueryAnswer> {
    let req: QuestionBody = parse_body(&body)?;
    Ok(Json(svc.query_video(&video, &req.question)?))
}

async fn persona(
    State(svc): State<Shared>,
    Path(user): Path<String>,
) -> Reply<fedfeed_core::persona::PersonaProfile> {
    Ok(Json(svc.persona(&user)?))
}

async fn friends(
    State(svc): State<Shared>,
    Path(user): Path<String>,
) -> Reply<Vec<fedfeed_core::socialrank::FriendEngagement>> {
    Ok(Json(svc.friends(&user)?))
}

async fn fed_run(State(svc): State<Shared>, body: Bytes) -> Reply<crate::service::FedRunResponse> {
    let cfg: FedRunConfig = parse_body(&body)?;
    let out = tokio::task::spawn_blocking(move || svc.run_federated(&cfg))
        .await
        .map_err(|e| ApiError::internal(format!("training task failed: {e}")))??;
    Ok(Json(out))
}

async fn classify(
    State(svc): State<Shared>,
    Path(post_id): Path<String>,
) -> Reply<crate::service::PostClassification> {
    Ok(Json(svc.classify_post(&post_id)?))
}

async fn healthz(State(svc): State<Shared>) -> Json<crate::service::Health> {
    Json(svc.health())
}

pub fn router(svc: Shared) -> Router {
    Router::new()
        .route("/feed/{user}", get(feed))
        .route("/feedback", post(feedback))
        .route("/events", post(events))
        .route("/videos/{id}/query", post(video_query))
        .route("/persona/{user}", get(persona))
        .route("/friends/{user}", get(friends))
        .route("/posts/{id}/category", get(classify))
        .route("/fed/run", post(fed_run))
        .route("/healthz", get(healthz))
        .with_state(svc)
}
