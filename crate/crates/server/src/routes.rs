use std::collections::HashMap;
use std::path::{Path, PathBuf};

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path as UrlPath, Query, Request, State, WebSocketUpgrade};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use polyseek::ingest::{ingest_paths, IngestReport};
use polyseek::media::{object_id_for_bytes, MediaType};
use polyseek::retrieval::{QueryOutcome, QuerySpec};
use polyseek::store::{CatalogEntry, ObjectRecord, TableStatus};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::api::{ApiError, IngestRequest, MoreLikeThisRequest, RefineBody};
use crate::{body_limit, preview, ws, AppState, NETWORK_PATHS};

pub fn router(state: AppState) -> Router {
    let limit = body_limit(state.engine.config.server.max_upload_bytes);
    Router::new()
        .route("/api/query", post(query))
        .route("/api/more-like-this", post(more_like_this))
        .route("/api/refine", post(refine))
        .route("/api/objects", get(search_objects))
        .route("/api/objects/{id}", get(lookup))
        .route("/api/segments/{id}/preview", get(segment_preview))
        .route("/api/ingest", post(ingest))
        .route("/api/index/build", post(build_index))
        .route("/api/status", get(status))
        .route("/ws", get(websocket))
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

/// Accepts `Authorization: Bearer <token>`, or `?token=` for browser WebSockets.
async fn require_token(State(state): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.engine.config.server.token {
        let bearer = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == token);
        let param = Query::<HashMap<String, String>>::try_from_uri(req.uri())
            .is_ok_and(|q| q.get("token").is_some_and(|t| t == token));
        if !bearer && !param {
            return ApiError::new(StatusCode::UNAUTHORIZED, "UNAUTHORIZED", "missing or wrong token").into_response();
        }
    }
    next.run(req).await
}

pub(crate) fn parse<T: DeserializeOwned>(body: Result<Bytes, BytesRejection>) -> Result<T, ApiError> {
    let bytes = body.map_err(|r| match r.status() {
        StatusCode::PAYLOAD_TOO_LARGE => ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "PAYLOAD_TOO_LARGE", r.body_text()),
        _ => ApiError::bad_request(r.body_text()),
    })?;
    serde_json::from_slice(&bytes).map_err(|e| ApiError::bad_request(format!("malformed payload: {e}")))
}

async fn query(State(state): State<AppState>, body: Result<Bytes, BytesRejection>) -> Result<Json<QueryOutcome>, ApiError> {
    let spec: QuerySpec = parse(body)?;
    state.check_reference_sizes(&spec)?;
    let outcome = state
        .run(move |engine| {
            let query = spec.decode(NETWORK_PATHS)?;
            engine.retriever.execute(&engine.read(), &query, |_| {})
        })
        .await?;
    Ok(Json(outcome))
}

async fn more_like_this(
    State(state): State<AppState>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<QueryOutcome>, ApiError> {
    let req: MoreLikeThisRequest = parse(body)?;
    Ok(Json(state.run(move |engine| mlt(engine, &req)).await?))
}

pub(crate) fn mlt(engine: &crate::Engine, req: &MoreLikeThisRequest) -> polyseek::Result<QueryOutcome> {
    let k = req.k.unwrap_or(engine.config.retrieval.default_k);
    engine.retriever.more_like_this(&engine.read(), &req.segment_id, &req.categories, k)
}

async fn refine(State(state): State<AppState>, body: Result<Bytes, BytesRejection>) -> Result<Json<QueryOutcome>, ApiError> {
    let req: RefineBody = parse(body)?;
    let outcome = state.run(move |engine| engine.retriever.refine(&engine.read(), &req.session_id, &req.request)).await?;
    Ok(Json(outcome))
}

async fn lookup(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<CatalogEntry>, ApiError> {
    Ok(Json(state.run(move |engine| engine.read().catalog().lookup(&id)).await?))
}

#[derive(Deserialize)]
struct NameSearch {
    #[serde(default)]
    name: String,
}

/// Objects whose name contains `?name=` (case-insensitive); all objects without it.
async fn search_objects(
    State(state): State<AppState>,
    Query(search): Query<NameSearch>,
) -> Result<Json<Vec<ObjectRecord>>, ApiError> {
    let records = state
        .run(move |engine| {
            let store = engine.read();
            let catalog = store.catalog();
            Ok(catalog.search_name(&search.name).into_iter().map(|o| catalog.record(o)).collect())
        })
        .await?;
    Ok(Json(records))
}

async fn segment_preview(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let p = state.run(move |engine| preview::segment_preview(&engine.read(), &id)).await?;
    Ok(([(header::CONTENT_TYPE, p.content_type)], p.bytes).into_response())
}

/// Writes an upload to `<data_dir>/uploads/<object id>/<name>`, so equal
/// names with different content never overwrite each other.
fn store_upload(data_dir: &Path, name: &str, data: &str) -> Result<PathBuf, ApiError> {
    let plain = Path::new(name).file_name().is_some_and(|f| f == name) && !name.starts_with('.');
    if !plain || MediaType::from_path(Path::new(name)).is_none() {
        return Err(ApiError::bad_request(format!("upload name `{name}` must be a plain file name with a media extension")));
    }
    let bytes = STANDARD.decode(data.trim()).map_err(|e| ApiError::bad_request(format!("upload `{name}` is not base64: {e}")))?;
    let dir = data_dir.join("uploads").join(object_id_for_bytes(&bytes));
    let io = |e: std::io::Error| ApiError::from(polyseek::Error::Io(e));
    std::fs::create_dir_all(&dir).map_err(io)?;
    let path = dir.join(name);
    std::fs::write(&path, &bytes).map_err(io)?;
    Ok(path)
}

async fn ingest(State(state): State<AppState>, body: Result<Bytes, BytesRejection>) -> Result<Json<IngestReport>, ApiError> {
    let req: IngestRequest = parse(body)?;
    let limit = state.engine.config.server.max_upload_bytes;
    if req.files.iter().any(|f| crate::api::decoded_len(&f.data) > limit) {
        return Err(ApiError::too_large(limit));
    }
    if req.paths.is_empty() && req.files.is_empty() {
        return Err(ApiError::bad_request("nothing to ingest"));
    }
    let mut paths = req.paths;
    for f in &req.files {
        paths.push(store_upload(&state.engine.config.data_dir, &f.name, &f.data)?);
    }
    let report = state.run(move |engine| ingest_paths(&mut engine.write(), &engine.config, &paths)).await?;
    Ok(Json(report))
}

async fn build_index(State(state): State<AppState>) -> Result<Json<Vec<TableStatus>>, ApiError> {
    let status = state
        .run(|engine| {
            let c = &engine.config;
            engine.write().build_indexes(c.index.va_bits, c.lsh_params())
        })
        .await?;
    Ok(Json(status))
}

#[derive(Debug, Serialize)]
struct Status {
    objects: usize,
    segments: usize,
    tables: Vec<TableStatus>,
}

async fn status(State(state): State<AppState>) -> Result<Json<Status>, ApiError> {
    let s = state
        .run(|engine| {
            let store = engine.read();
            Ok(Status {
                objects: store.catalog().objects().len(),
                segments: store.catalog().segments().len(),
                tables: store.status(),
            })
        })
        .await?;
    Ok(Json(s))
}

async fn websocket(State(state): State<AppState>, upgrade: WebSocketUpgrade) -> Response {
    upgrade.on_upgrade(move |socket| ws::session(socket, state))
}
