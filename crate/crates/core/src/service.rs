//! HTTP/JSON API over a shared store.
//!
//! Writes are serialized behind one lock and persisted to the event log before
//! they become visible. Reads grab an `Arc` snapshot and compute without
//! holding the lock. Every response carries the graph version it reflects.
//! Perspectives travel with each request and are never stored.

use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{Any, CorsLayer};

use crate::error::Error;
use crate::graph::{Agency, KnowledgeGraph, NewResource, Paradigm, Polarity, ResourceKind, Timestamp, ViewpointType};
use crate::io::{export_map, records_since, EventLog, ExportFormat};
use crate::perspective::{build_map, Perspective, PerspectiveSpec};
use crate::query::{k_nearest, nearest_via, neighborhood, shortest_paths};
use crate::session::{record_feedback, FeedbackEvent};

struct Store {
    graph: Arc<KnowledgeGraph>,
    log: Option<EventLog>,
}

/// Shared handle to the store; cheap to clone.
#[derive(Clone)]
pub struct AppState {
    store: Arc<RwLock<Store>>,
}

impl AppState {
    pub fn in_memory(graph: KnowledgeGraph) -> Self {
        Self::with_log(graph, None)
    }

    /// Replays `path` (creating it when missing) and persists every write to it.
    pub fn open(path: impl AsRef<Path>) -> crate::Result<Self> {
        let (log, graph) = EventLog::open(path)?;
        Ok(Self::with_log(graph, Some(log)))
    }

    fn with_log(graph: KnowledgeGraph, log: Option<EventLog>) -> Self {
        Self {
            store: Arc::new(RwLock::new(Store {
                graph: Arc::new(graph),
                log,
            })),
        }
    }

    /// Immutable view of the current graph.
    pub fn snapshot(&self) -> Arc<KnowledgeGraph> {
        self.store.read().expect("store lock").graph.clone()
    }

    /// Applies `op` to a copy of the graph, persists the new records, then
    /// publishes the copy. Nothing is published if either step fails.
    fn write<T>(&self, op: impl FnOnce(&mut KnowledgeGraph) -> crate::Result<T>) -> crate::Result<(u64, T)> {
        let mut store = self.store.write().expect("store lock");
        let mut next = (*store.graph).clone();
        let out = op(&mut next)?;
        if let Some(log) = store.log.as_mut() {
            log.sync(&next)?;
        }
        let version = next.version();
        store.graph = Arc::new(next);
        Ok((version, out))
    }
}

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: "InvalidBody",
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DuplicateId(_) => StatusCode::CONFLICT,
            Error::UnknownResource(_) => StatusCode::NOT_FOUND,
            Error::SelfLoop(_)
            | Error::NonAgentEmitter(_)
            | Error::KindMismatch { .. }
            | Error::AgencyMismatch(_)
            | Error::TimeRegression { .. }
            | Error::TimeTravel { .. }
            | Error::SameResource(_)
            | Error::MixedBeam => StatusCode::UNPROCESSABLE_ENTITY,
            Error::InvalidPerspective(_) | Error::InvalidArgument(_) | Error::MalformedScript { .. } => {
                StatusCode::BAD_REQUEST
            }
            Error::SequenceGap { .. } | Error::CorruptLine { .. } | Error::Io(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        Self {
            status,
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({"error": self.code, "message": self.message})),
        )
            .into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResourceBody {
    id: Option<String>,
    kind: ResourceKind,
    agency: Option<Agency>,
    label: Option<String>,
    at: Option<Timestamp>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ViewpointBody {
    emitter: String,
    r2: String,
    r3: String,
    paradigm: Paradigm,
    polarity: Polarity,
    at: Timestamp,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsBody {
    #[serde(default)]
    perspective: PerspectiveSpec,
    now: Option<Timestamp>,
    source: String,
    target: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NearBody {
    #[serde(default)]
    perspective: PerspectiveSpec,
    now: Option<Timestamp>,
    origin: String,
    kind: Option<ResourceKind>,
    k: usize,
    /// Rank by route length through each candidate to this resource.
    via: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NeighborhoodBody {
    #[serde(default)]
    perspective: PerspectiveSpec,
    now: Option<Timestamp>,
    origin: String,
    radius: f64,
}

#[derive(Deserialize)]
struct MapParams {
    perspective: Option<String>,
    now: Option<u64>,
}

#[derive(Deserialize)]
struct EventsParams {
    since: Option<u64>,
}

async fn add_resource(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let body: ResourceBody = parse(&body)?;
    let (version, id) = state.write(|g| {
        let mut new = NewResource::new(body.kind);
        new.id = body.id;
        new.agency = body.agency;
        new.label = body.label;
        new.at = body.at.unwrap_or(g.max_timestamp());
        g.add_resource(new)
    })?;
    Ok(Json(json!({"version": version, "id": id})))
}

async fn add_viewpoint(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let body: ViewpointBody = parse(&body)?;
    let (version, id) = state.write(|g| {
        g.add_viewpoint(
            &body.emitter,
            &body.r2,
            &body.r3,
            ViewpointType::new(body.paradigm, body.polarity),
            body.at,
        )
    })?;
    Ok(Json(json!({"version": version, "id": id})))
}

async fn feedback(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let event: FeedbackEvent = parse(&body)?;
    let (version, ids) = state.write(|g| record_feedback(g, &event))?;
    Ok(Json(json!({"version": version, "ids": ids})))
}

fn map_for(
    graph: &KnowledgeGraph,
    perspective: &PerspectiveSpec,
    now: Option<Timestamp>,
) -> crate::Result<crate::perspective::KnowledgeMap> {
    let perspective = perspective.resolve()?;
    build_map(graph, &perspective, now.unwrap_or(graph.max_timestamp()))
}

async fn query_paths(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let body: PathsBody = parse(&body)?;
    let graph = state.snapshot();
    let map = map_for(&graph, &body.perspective, body.now)?;
    let answer = shortest_paths(&map, &body.source, &body.target)?;
    Ok(Json(json!({"version": graph.version(), "result": answer})))
}

async fn query_near(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let body: NearBody = parse(&body)?;
    let graph = state.snapshot();
    let map = map_for(&graph, &body.perspective, body.now)?;
    let ranked = match &body.via {
        Some(via) => nearest_via(&map, &body.origin, via, body.kind, body.k)?,
        None => k_nearest(&map, &body.origin, body.kind, body.k)?,
    };
    Ok(Json(json!({"version": graph.version(), "result": ranked})))
}

async fn query_neighborhood(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let body: NeighborhoodBody = parse(&body)?;
    let graph = state.snapshot();
    let map = map_for(&graph, &body.perspective, body.now)?;
    let hood = neighborhood(&map, &body.origin, body.radius)?;
    Ok(Json(json!({"version": graph.version(), "result": hood})))
}

async fn get_map(
    State(state): State<AppState>,
    params: Result<Query<MapParams>, axum::extract::rejection::QueryRejection>,
) -> ApiResult {
    let Query(params) = params.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let perspective = match params.perspective.as_deref() {
        Some(input) => Perspective::resolve(input)?,
        None => Perspective::neutral(),
    };
    let graph = state.snapshot();
    let now = params.now.map(Timestamp).unwrap_or(graph.max_timestamp());
    let map = build_map(&graph, &perspective, now)?;
    let exported: Value =
        serde_json::from_slice(&export_map(&map, ExportFormat::Json)).expect("export is valid JSON");
    Ok(Json(json!({"version": graph.version(), "map": exported})))
}

async fn get_events(
    State(state): State<AppState>,
    params: Result<Query<EventsParams>, axum::extract::rejection::QueryRejection>,
) -> ApiResult {
    let Query(params) = params.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let graph = state.snapshot();
    let events = records_since(&graph, params.since.unwrap_or(0));
    Ok(Json(json!({"version": graph.version(), "events": events})))
}

async fn get_version(State(state): State<AppState>) -> Json<Value> {
    Json(json!({"version": state.snapshot().version()}))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/resources", post(add_resource))
        .route("/viewpoints", post(add_viewpoint))
        .route("/feedback", post(feedback))
        .route("/query/paths", post(query_paths))
        .route("/query/near", post(query_near))
        .route("/query/neighborhood", post(query_neighborhood))
        .route("/map", get(get_map))
        .route("/events", get(get_events))
        .route("/version", get(get_version))
        .with_state(state)
}

/// `"*"` allows any origin.
pub fn cors(origin: &str) -> crate::Result<CorsLayer> {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    if origin == "*" {
        return Ok(layer.allow_origin(Any));
    }
    let value = HeaderValue::from_str(origin)
        .map_err(|e| Error::InvalidArgument(format!("cors origin `{origin}`: {e}")))?;
    Ok(layer.allow_origin(value))
}

pub async fn serve(state: AppState, addr: SocketAddr, cors_origin: &str) -> crate::Result<()> {
    let app = router(state).layer(cors(cors_origin)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app).await?;
    Ok(())
}
