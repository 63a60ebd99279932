#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use fedfeed::http::router;
use fedfeed::Service;
use fedfeed_core::corpus::{load_corpus, Corpus};
use fedfeed_core::EngineConfig;
use http_body_util::BodyExt;
use tower::ServiceExt;

pub const NOW: i64 = 1_700_100_000;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn corpus() -> Corpus {
    load_corpus(fixture("corpus.jsonl")).unwrap()
}

pub fn config() -> EngineConfig {
    EngineConfig::load(&fixture("config.json")).unwrap()
}

pub fn app() -> Router {
    router(Arc::new(Service::new(corpus(), config()).unwrap()))
}

pub async fn call(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<&str>,
    now: Option<i64>,
) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(now) = now {
        req = req.header("x-now", now.to_string());
    }
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req
        .body(
            body.map(|b| Body::from(b.to_string()))
                .unwrap_or_else(Body::empty),
        )
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

pub fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}
