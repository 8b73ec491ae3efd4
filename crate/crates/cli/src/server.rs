//! HTTP/JSON service over in-memory sessions.
//!
//! The session map lock is held only for lookups and inserts. Each session has
//! its own async mutex, so asks on one session queue in arrival order while
//! different sessions proceed in parallel on the blocking pool.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cmaoe_core::session::{create_session, ApiError, AskRequest, Session, SessionSource};
use cmaoe_core::SolveParams;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;

type Shared = Arc<Mutex<Session>>;

pub struct AppState {
    sessions: RwLock<HashMap<String, Shared>>,
    data_dir: PathBuf,
    params: SolveParams,
}

impl AppState {
    pub fn new(data_dir: impl Into<PathBuf>, params: SolveParams) -> Arc<Self> {
        Arc::new(AppState { sessions: RwLock::new(HashMap::new()), data_dir: data_dir.into(), params })
    }

    fn get(&self, id: &str) -> Result<Shared, HttpError> {
        let map = self.sessions.read().expect("session map poisoned");
        map.get(id).cloned().ok_or_else(|| ApiError::UnknownSession(id.to_string()).into())
    }

    fn insert(&self, session: Session) {
        let id = session.id.clone();
        self.sessions.write().expect("session map poisoned").insert(id, Arc::new(Mutex::new(session)));
    }

    /// Resolves a bare file name inside the data directory.
    fn file(&self, name: &str) -> Result<PathBuf, HttpError> {
        let valid = !name.is_empty()
            && name != "."
            && name != ".."
            && !name.contains(['/', '\\'])
            && Path::new(name).file_name().is_some_and(|f| f == name);
        if !valid {
            return Err(ApiError::Validation(format!("{name:?} is not a plain file name")).into());
        }
        Ok(self.data_dir.join(name))
    }
}

pub struct HttpError(ApiError);

impl From<ApiError> for HttpError {
    fn from(e: ApiError) -> Self {
        HttpError(e)
    }
}

impl From<JsonRejection> for HttpError {
    fn from(e: JsonRejection) -> Self {
        HttpError(ApiError::Validation(e.body_text()))
    }
}

impl IntoResponse for HttpError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(json!({ "error": self.0.code(), "message": self.0.to_string() }))).into_response()
    }
}

type Reply<T> = Result<Json<T>, HttpError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct FileRequest {
    pub file: String,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/load", post(load))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/questions", get(questions))
        .route("/sessions/{id}/ask", post(ask))
        .route("/sessions/{id}/persist", post(persist))
        .with_state(state)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, HttpError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?.map_err(HttpError)
}

async fn create(State(state): State<Arc<AppState>>, body: Result<Json<Value>, JsonRejection>) -> Result<Response, HttpError> {
    let source = SessionSource::from_json(body?.0)?;
    let params = state.params.clone();
    let session = blocking(move || create_session(&source, &params)).await?;
    let summary = session.summary();
    state.insert(session);
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn show(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Reply<Session> {
    let session = state.get(&id)?;
    let guard = session.lock().await;
    Ok(Json(guard.clone()))
}

async fn questions(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Reply<Value> {
    let session = state.get(&id)?;
    let guard = session.lock().await;
    Ok(Json(json!(guard.questions())))
}

async fn ask(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<AskRequest>, JsonRejection>,
) -> Reply<Value> {
    let request = body?.0;
    let session = state.get(&id)?;
    let mut guard = session.lock_owned().await;
    let response = blocking(move || guard.ask(&request)).await?;
    Ok(Json(json!(response)))
}

async fn persist(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<FileRequest>, JsonRejection>,
) -> Reply<Value> {
    let request = body?.0;
    let path = state.file(&request.file)?;
    let session = state.get(&id)?;
    let guard = session.lock_owned().await;
    blocking(move || {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        guard.persist(&path)
    })
    .await?;
    Ok(Json(json!({ "id": id, "file": request.file })))
}

/// A loaded session keeps its stored id and replaces any live session with it.
async fn load(State(state): State<Arc<AppState>>, body: Result<Json<FileRequest>, JsonRejection>) -> Reply<Value> {
    let path = state.file(&body?.0.file)?;
    let session = blocking(move || Session::load(&path)).await?;
    let summary = session.summary();
    state.insert(session);
    Ok(Json(json!(summary)))
}

pub async fn serve(addr: std::net::SocketAddr, state: Arc<AppState>) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
