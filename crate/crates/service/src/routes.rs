use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Path, Query, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::cors::{Any, CorsLayer};

use crate::error::ServiceError;
use crate::state::{AppState, OrbitView};

type Shared = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET]);
    Router::new()
        .route("/manifest", get(manifest))
        .route("/header/{quality}", get(stream_header))
        .route("/gof/{quality}/{index}", get(gof))
        .route("/trailer/{quality}", get(trailer))
        .route("/render", get(render))
        .route("/stats", get(stats))
        .layer(cors)
        .with_state(state)
}

/// Runs CPU-bound work off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(format!("worker failed: {e}")))?
}

fn octets(bytes: Vec<u8>) -> Response {
    (
        StatusCode::OK,
        [
            (header::CONTENT_TYPE, "application/octet-stream".to_string()),
            (header::CONTENT_LENGTH, bytes.len().to_string()),
        ],
        Body::from(bytes),
    )
        .into_response()
}

async fn manifest(State(s): Shared) -> Result<Response, ServiceError> {
    let m = blocking(move || s.current_manifest()).await?;
    Ok(Json(m).into_response())
}

async fn stream_header(State(s): Shared, Path(q): Path<usize>) -> Result<Response, ServiceError> {
    let bytes = blocking(move || s.stream_bytes(q, |d| Ok(d.reader().header_range()))).await?;
    Ok(octets(bytes))
}

async fn trailer(State(s): Shared, Path(q): Path<usize>) -> Result<Response, ServiceError> {
    let bytes = blocking(move || s.stream_bytes(q, |d| Ok(d.reader().trailer_range()))).await?;
    Ok(octets(bytes))
}

async fn gof(
    State(s): Shared,
    Path((q, i)): Path<(usize, usize)>,
) -> Result<Response, ServiceError> {
    let bytes = blocking(move || s.stream_bytes(q, |d| d.reader().gof_range(i))).await?;
    Ok(octets(bytes))
}

#[derive(Debug, Clone, Deserialize)]
pub struct RenderQuery {
    pub quality: usize,
    pub frame: usize,
    pub yaw: f32,
    pub pitch: f32,
    pub radius: f32,
    pub w: u32,
    pub h: u32,
}

async fn render(State(s): Shared, Query(q): Query<RenderQuery>) -> Result<Response, ServiceError> {
    let view = OrbitView {
        yaw: q.yaw,
        pitch: q.pitch,
        radius: q.radius,
        width: q.w,
        height: q.h,
    };
    let png = blocking(move || s.render(q.quality, q.frame, view)).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn stats(State(s): Shared) -> Response {
    Json(s.stats()).into_response()
}
