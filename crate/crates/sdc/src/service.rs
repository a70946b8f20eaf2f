//! HTTP session service for stepwise clustering.
//!
//! A session wraps one [`SdcRun`]. Clients upload a CSV, then fetch the
//! decision graph of the pending dimension and post its boundaries, one
//! dimension at a time, until the run is finished.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | multipart upload, returns `{sessionId, dimCount}` |
//! | GET | `/sessions/{id}` | status |
//! | GET | `/sessions/{id}/graph` | decision graph of the pending dimension |
//! | POST | `/sessions/{id}/thresholds` | `{"boundaries": [..]}`, advances one step |
//! | GET | `/sessions/{id}/result` | final labels |
//! | DELETE | `/sessions/{id}` | abort |

use std::collections::HashMap;
use std::future::Future;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use sdc_core::{
    detect_mountains_auto, read_csv, ClusterPartition, CsvOptions, GraphPoint, SdcError,
    SdcOptions, SdcRun, Thresholds,
};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::watch;
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;
use tracing::info;

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(3600);
const UPLOAD_LIMIT: usize = 512 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    AwaitingThresholds,
    Finished,
    Aborted,
}

struct Session {
    run: SdcRun,
    status: watch::Sender<SessionStatus>,
    touched: Instant,
}

impl Session {
    fn status(&self) -> SessionStatus {
        *self.status.borrow()
    }

    /// Fails with 409 unless the session still takes thresholds.
    fn ensure_open(&self) -> Result<(), ApiError> {
        match self.status() {
            SessionStatus::AwaitingThresholds => Ok(()),
            SessionStatus::Finished => Err(ApiError::conflict("session already finished")),
            SessionStatus::Aborted => Err(ApiError::conflict("session was aborted")),
        }
    }
}

type SessionHandle = Arc<Mutex<Session>>;

struct Inner {
    sessions: Mutex<HashMap<String, SessionHandle>>,
    ttl: Duration,
}

/// Shared, cheaply cloneable service state.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl Default for AppState {
    fn default() -> Self {
        Self::new(DEFAULT_SESSION_TTL)
    }
}

impl AppState {
    pub fn new(ttl: Duration) -> Self {
        Self {
            inner: Arc::new(Inner {
                sessions: Mutex::new(HashMap::new()),
                ttl,
            }),
        }
    }

    /// Registers a prepared run and returns its session id.
    pub fn insert(&self, run: SdcRun) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let initial = if run.is_finished() {
            SessionStatus::Finished
        } else {
            SessionStatus::AwaitingThresholds
        };
        let session = Session {
            run,
            status: watch::Sender::new(initial),
            touched: Instant::now(),
        };
        self.inner
            .sessions
            .lock()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    pub fn session_count(&self) -> usize {
        self.inner.sessions.lock().unwrap().len()
    }

    fn handle(&self, id: &str) -> Result<SessionHandle, ApiError> {
        let mut sessions = self.inner.sessions.lock().unwrap();
        let handle = sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))?;
        let mut session = handle.lock().unwrap();
        if session.touched.elapsed() > self.inner.ttl {
            drop(session);
            sessions.remove(id);
            return Err(ApiError::not_found(id));
        }
        session.touched = Instant::now();
        drop(session);
        Ok(handle)
    }

    /// Watches a session's status, for callers that block until the
    /// interactive run is done.
    pub fn subscribe(&self, id: &str) -> Option<watch::Receiver<SessionStatus>> {
        let sessions = self.inner.sessions.lock().unwrap();
        let handle = sessions.get(id)?;
        let rx = handle.lock().unwrap().status.subscribe();
        Some(rx)
    }

    /// The final partition of a finished session.
    pub fn result(&self, id: &str) -> Option<ClusterPartition> {
        let sessions = self.inner.sessions.lock().unwrap();
        let session = sessions.get(id)?.lock().unwrap();
        session.run.result().cloned()
    }

    /// Drops sessions idle for longer than the TTL; returns how many.
    pub fn sweep(&self) -> usize {
        let ttl = self.inner.ttl;
        let mut sessions = self.inner.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|_, s| s.lock().unwrap().touched.elapsed() <= ttl);
        before - sessions.len()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown session {id}"))
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl From<SdcError> for ApiError {
    fn from(e: SdcError) -> Self {
        let status = match e {
            SdcError::RunFinished | SdcError::Aborted(_) => StatusCode::CONFLICT,
            SdcError::Io(_) | SdcError::InvalidPartition(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreatedSession {
    pub session_id: String,
    pub dim_count: usize,
    pub object_count: usize,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionInfo {
    pub session_id: String,
    pub status: SessionStatus,
    /// 1-based index of the pending dimension.
    pub dim_index: Option<usize>,
    pub dim_count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphResponse {
    pub dim_index: usize,
    pub dim_count: usize,
    pub cluster_count_so_far: usize,
    pub radius: f64,
    pub shortcut: bool,
    /// What unattended mode would cut at.
    pub suggested_boundaries: Vec<f64>,
    pub points: Vec<GraphPoint>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ThresholdRequest {
    #[serde(default)]
    pub boundaries: Vec<f64>,
    /// Optional 1-based guard: rejected unless it names the pending dimension.
    #[serde(default)]
    pub dim_index: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StepResponse {
    pub dim_index: usize,
    pub fusion_cluster_sizes: Vec<usize>,
    pub deferred: usize,
    pub finished: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelEntry {
    pub object_id: usize,
    pub cluster_id: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultResponse {
    pub cluster_count: usize,
    pub labels: Vec<LabelEntry>,
}

fn parse_flag(name: &str, text: &str) -> Result<bool, ApiError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(ApiError::bad_request(format!("field {name}: expected a boolean, got {other:?}"))),
    }
}

/// Multipart fields: `file` (CSV, required), `missingMarker`, `header`,
/// `labelColumn`, `normalize`, `enhance`.
async fn create_session(
    State(state): State<AppState>,
    mut form: Multipart,
) -> Result<(StatusCode, Json<CreatedSession>), ApiError> {
    let mut csv_bytes = None;
    let mut csv_opts = CsvOptions::default();
    let mut opts = SdcOptions::default();
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(e.to_string()))?
    {
        let name = field.name().unwrap_or_default().to_string();
        let bad = |e: axum::extract::multipart::MultipartError| ApiError::bad_request(e.to_string());
        match name.as_str() {
            "file" => csv_bytes = Some(field.bytes().await.map_err(bad)?),
            "missingMarker" => csv_opts.missing_marker = field.text().await.map_err(bad)?,
            "header" => csv_opts.has_header = parse_flag(&name, &field.text().await.map_err(bad)?)?,
            "labelColumn" => {
                let text = field.text().await.map_err(bad)?;
                csv_opts.label_column = (!text.trim().is_empty()).then_some(text);
            }
            "normalize" => opts.normalize = parse_flag(&name, &field.text().await.map_err(bad)?)?,
            "enhance" => opts.enhance = parse_flag(&name, &field.text().await.map_err(bad)?)?,
            other => return Err(ApiError::bad_request(format!("unexpected field {other:?}"))),
        }
    }
    let bytes = csv_bytes.ok_or_else(|| ApiError::bad_request("missing multipart field \"file\""))?;

    let run = tokio::task::spawn_blocking(move || {
        let ds = read_csv(bytes.as_ref(), &csv_opts)?;
        SdcRun::new(&ds, opts)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;

    let created = CreatedSession {
        session_id: String::new(),
        dim_count: run.dim_count(),
        object_count: run.dataset().object_count(),
    };
    let session_id = state.insert(run);
    info!(%session_id, dims = created.dim_count, "session created");
    Ok((
        StatusCode::CREATED,
        Json(CreatedSession {
            session_id,
            ..created
        }),
    ))
}

async fn session_info(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionInfo>, ApiError> {
    let handle = state.handle(&id)?;
    let session = handle.lock().unwrap();
    Ok(Json(SessionInfo {
        session_id: id,
        status: session.status(),
        dim_index: session.run.pending_dim().map(|d| d + 1),
        dim_count: session.run.dim_count(),
    }))
}

async fn current_graph(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<GraphResponse>, ApiError> {
    let handle = state.handle(&id)?;
    let session = handle.lock().unwrap();
    session.ensure_open()?;
    let graph = session
        .run
        .current_graph()
        .ok_or_else(|| ApiError::conflict("no dimension pending"))?;
    Ok(Json(GraphResponse {
        dim_index: graph.dim + 1,
        dim_count: session.run.dim_count(),
        cluster_count_so_far: session.run.fused().map_or(0, |p| p.cluster_count()),
        radius: graph.radius,
        shortcut: graph.shortcut,
        suggested_boundaries: detect_mountains_auto(graph).boundaries().to_vec(),
        points: graph.points.clone(),
    }))
}

async fn post_thresholds(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ThresholdRequest>, JsonRejection>,
) -> Result<Json<StepResponse>, ApiError> {
    let handle = state.handle(&id)?;
    let mut session = handle.lock().unwrap();
    session.ensure_open()?;
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let pending = session
        .run
        .pending_dim()
        .ok_or_else(|| ApiError::conflict("no dimension pending"))?;
    if let Some(dim_index) = req.dim_index {
        if dim_index != pending + 1 {
            return Err(ApiError::conflict(format!(
                "thresholds for dimension {dim_index} posted while dimension {} is pending",
                pending + 1
            )));
        }
    }
    let thresholds = Thresholds::new(req.boundaries)?;
    let summary = session.run.submit(thresholds)?;
    if summary.finished {
        session.status.send_replace(SessionStatus::Finished);
        info!(session_id = %id, "session finished");
    }
    Ok(Json(StepResponse {
        dim_index: summary.dim + 1,
        fusion_cluster_sizes: summary.fusion_cluster_sizes,
        deferred: summary.deferred,
        finished: summary.finished,
    }))
}

async fn get_result(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<ResultResponse>, ApiError> {
    let handle = state.handle(&id)?;
    let session = handle.lock().unwrap();
    if session.status() == SessionStatus::Aborted {
        return Err(ApiError::conflict("session was aborted"));
    }
    let partition = session
        .run
        .result()
        .ok_or_else(|| ApiError::conflict("session not finished"))?;
    Ok(Json(ResultResponse {
        cluster_count: partition.cluster_count(),
        labels: partition
            .iter()
            .map(|(object_id, cluster_id)| LabelEntry {
                object_id,
                cluster_id,
            })
            .collect(),
    }))
}

async fn abort_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    let handle = state.handle(&id)?;
    let session = handle.lock().unwrap();
    if session.status() == SessionStatus::AwaitingThresholds {
        session.status.send_replace(SessionStatus::Aborted);
        info!(session_id = %id, "session aborted");
    }
    Ok(StatusCode::NO_CONTENT)
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info).delete(abort_session))
        .route("/sessions/{id}/graph", get(current_graph))
        .route("/sessions/{id}/thresholds", post(post_thresholds))
        .route("/sessions/{id}/result", get(get_result))
        .layer(DefaultBodyLimit::max(UPLOAD_LIMIT))
        .layer(TraceLayer::new_for_http())
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until `shutdown` resolves, sweeping idle sessions in the
/// background.
pub async fn serve(
    listener: TcpListener,
    state: AppState,
    static_dir: Option<PathBuf>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let sweeper = {
        let state = state.clone();
        let period = (state.inner.ttl / 4).clamp(Duration::from_secs(1), Duration::from_secs(60));
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                let dropped = state.sweep();
                if dropped > 0 {
                    info!(dropped, "expired idle sessions");
                }
            }
        })
    };
    let app = router(state, static_dir);
    let result = axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await;
    sweeper.abort();
    result
}
