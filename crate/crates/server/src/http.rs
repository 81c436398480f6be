use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use plotmap_core::api;
use plotmap_core::protocol::PROTOCOL;
use plotmap_core::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::worker::SessionWorker;

/// Upper bound on HTTP-created sessions alive at once.
pub const MAX_HTTP_SESSIONS: usize = 1024;
const BODY_LIMIT: usize = 512 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    data_dir: Option<PathBuf>,
    sessions: Mutex<HashMap<u64, Arc<SessionWorker>>>,
    next_session: AtomicU64,
}

impl AppState {
    pub fn new(data_dir: Option<PathBuf>) -> Self {
        Self {
            inner: Arc::new(Inner {
                data_dir,
                sessions: Mutex::new(HashMap::new()),
                next_session: AtomicU64::new(1),
            }),
        }
    }

    pub fn data_dir(&self) -> Option<PathBuf> {
        self.inner.data_dir.clone()
    }
}

/// An engine error rendered as an HTTP response.
pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0.code() {
            "missing-reference" => StatusCode::NOT_FOUND,
            "capacity" => StatusCode::PAYLOAD_TOO_LARGE,
            "episode-finished" => StatusCode::CONFLICT,
            "generation-failed" => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        let body = json!({ "error": { "code": self.0.code(), "message": self.0.to_string() } });
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

fn decode<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError(Error::InvalidInput(format!("bad request body: {e}"))))
}

/// Runs CPU-bound engine work off the async executor.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> plotmap_core::Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(Error::InvalidInput(format!("worker failed: {e}"))))?
        .map_err(ApiError)
}

fn json_bytes<T: Serialize>(value: &T) -> Response {
    let body = serde_json::to_vec(value).expect("response bodies serialize");
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let router = Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/v1/health", get(health))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", post(session_message).delete(close_session))
        .route("/v1/maps/generate", post(generate_maps))
        .route("/v1/tasks/generate", post(generate_tasks))
        .route("/v1/evaluate", post(evaluate))
        .route("/v1/rollout", post(rollout))
        .route("/v1/render", post(render))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state);
    match static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router.route("/", get(no_ui)),
    }
}

async fn no_ui() -> impl IntoResponse {
    (
        [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
        format!("plotmap service ({PROTOCOL}); no static assets configured, connect to /ws\n"),
    )
}

async fn health() -> Json<Value> {
    Json(json!({ "ok": true, "protocol": PROTOCOL }))
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.protocols([PROTOCOL])
        .on_upgrade(move |socket| ws_session(socket, state.data_dir()))
}

async fn ws_session(socket: WebSocket, data_dir: Option<PathBuf>) {
    let worker = SessionWorker::spawn(data_dir);
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = tokio::sync::mpsc::unbounded_channel::<String>();
    let writer = tokio::spawn(async move {
        while let Some(msg) = rx.recv().await {
            if sink.send(Message::Text(msg.into())).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(msg)) = stream.next().await {
        let line = match msg {
            Message::Text(text) => text.to_string(),
            Message::Binary(bytes) => String::from_utf8_lossy(&bytes).into_owned(),
            Message::Close(_) => break,
            _ => continue,
        };
        if !worker.submit(line, tx.clone()) {
            break;
        }
    }
    drop(tx);
    drop(worker);
    let _ = writer.await;
}

async fn create_session(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    let mut sessions = state.inner.sessions.lock().expect("session table");
    if sessions.len() >= MAX_HTTP_SESSIONS {
        return Err(Error::Capacity(format!("at most {MAX_HTTP_SESSIONS} open sessions")).into());
    }
    let id = state.inner.next_session.fetch_add(1, Ordering::Relaxed);
    sessions.insert(id, Arc::new(SessionWorker::spawn(state.data_dir())));
    Ok(Json(json!({ "session": id, "protocol": PROTOCOL })))
}

fn lookup(state: &AppState, id: u64) -> ApiResult<Arc<SessionWorker>> {
    state
        .inner
        .sessions
        .lock()
        .expect("session table")
        .get(&id)
        .cloned()
        .ok_or_else(|| ApiError(Error::MissingReference(format!("no session {id}"))))
}

/// Sends one protocol request; the reply carries the streamed events and
/// the response separately.
async fn session_message(State(state): State<AppState>, Path(id): Path<u64>, body: String) -> ApiResult<Response> {
    let worker = lookup(&state, id)?;
    let mut messages = worker.call(body).await;
    let response = messages
        .pop()
        .ok_or_else(|| ApiError(Error::InvalidInput("session stopped".into())))?;
    let mut out = String::from("{\"events\":[");
    out.push_str(&messages.join(","));
    out.push_str("],\"response\":");
    out.push_str(&response);
    out.push('}');
    Ok(([(header::CONTENT_TYPE, "application/json")], out).into_response())
}

async fn close_session(State(state): State<AppState>, Path(id): Path<u64>) -> ApiResult<Json<Value>> {
    let removed = state.inner.sessions.lock().expect("session table").remove(&id);
    match removed {
        Some(_) => Ok(Json(json!({ "closed": id }))),
        None => Err(Error::MissingReference(format!("no session {id}")).into()),
    }
}

async fn generate_maps(body: Bytes) -> ApiResult<Response> {
    let req: api::GenerateMapsRequest = decode(&body)?;
    let maps = blocking(move || api::generate_maps(&req)).await?;
    Ok(json_bytes(&maps))
}

async fn generate_tasks(body: Bytes) -> ApiResult<Response> {
    let req: api::GenerateTasksRequest = decode(&body)?;
    let out = blocking(move || api::generate_tasks(&req)).await?;
    Ok(json_bytes(&out))
}

async fn evaluate(body: Bytes) -> ApiResult<Response> {
    let req: api::EvaluateRequest = decode(&body)?;
    let report = blocking(move || api::evaluate(&req)).await?;
    Ok(json_bytes(&report))
}

async fn rollout(body: Bytes) -> ApiResult<Response> {
    let req: api::RolloutRequest = decode(&body)?;
    let out = blocking(move || api::run_rollout(&req)).await?;
    Ok(json_bytes(&out))
}

async fn render(body: Bytes) -> ApiResult<Response> {
    let req: api::RenderRequest = decode(&body)?;
    let png = blocking(move || api::render(&req)).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}
