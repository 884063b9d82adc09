//! HTTP front end for VQE runs: create a session, follow its records over
//! server-sent events, abort it, fetch rendered artifacts.
//!
//! ```text
//! POST /sessions                       {qubo_csv, config} -> {id}
//! GET  /sessions/{id}                  status report
//! GET  /sessions/{id}/events           SSE: `record`* then one `status`
//! POST /sessions/{id}/abort            idempotent
//! GET  /sessions/{id}/artifacts/{kind} stream_jsonl | wav:<strategy>
//! GET  /health
//! ```

pub mod artifacts;
pub mod error;
pub mod session;
pub mod validate;

use std::collections::HashMap;
use std::convert::Infallible;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::Serialize;
use tokio::net::TcpListener;
use tokio::sync::Semaphore;

use crate::artifacts::ArtifactKind;
use crate::error::ApiError;
use crate::session::{Session, Status, StatusReport};

pub use crate::session::drive;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Runs executing at once; later sessions wait as `pending`.
    pub max_concurrent_runs: usize,
    /// Terminal sessions untouched for this long are dropped.
    pub idle_ttl: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            max_concurrent_runs: std::thread::available_parallelism().map_or(2, |n| n.get()),
            idle_ttl: Duration::from_secs(30 * 60),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<Session>>>>,
    slots: Arc<Semaphore>,
    config: Arc<ServerConfig>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        Self {
            sessions: Arc::default(),
            slots: Arc::new(Semaphore::new(config.max_concurrent_runs.max(1))),
            config: Arc::new(config),
        }
    }

    pub fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        let found = self.sessions.lock().unwrap_or_else(|e| e.into_inner()).get(id).cloned();
        let session = found.ok_or_else(|| ApiError::UnknownSession(id.to_string()))?;
        session.touch();
        Ok(session)
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops terminal sessions idle past the TTL; returns how many went.
    pub fn reap_idle(&self, now: Instant) -> usize {
        let ttl = self.config.idle_ttl;
        let mut sessions = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        let before = sessions.len();
        sessions.retain(|_, s| !(s.status().is_terminal() && now.duration_since(s.idle_since()) >= ttl));
        before - sessions.len()
    }

    /// Periodic reaper; runs until the runtime shuts down.
    pub fn spawn_reaper(&self) -> tokio::task::JoinHandle<()> {
        let state = self.clone();
        let period = (self.config.idle_ttl / 4).max(Duration::from_millis(100));
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                let gone = state.reap_idle(Instant::now());
                if gone > 0 {
                    log::info!("reaped {gone} idle sessions");
                }
            }
        })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_status))
        .route("/sessions/{id}/events", get(stream_events))
        .route("/sessions/{id}/abort", post(abort_session))
        .route("/sessions/{id}/artifacts/{kind}", get(get_artifact))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    let state = AppState::new(config);
    state.spawn_reaper();
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    sessions: usize,
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok",
        sessions: state.len(),
    })
}

#[derive(Serialize)]
struct Created {
    id: String,
    status: Status,
    expected_records: usize,
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let accepted = validate::validate_request(&body).map_err(ApiError::Invalid)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Arc::new(Session::new(
        id.clone(),
        accepted.config,
        accepted.plan.labels.clone(),
        accepted.expected_records,
    ));
    state
        .sessions
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(id.clone(), session.clone());
    tokio::spawn(drive(session, accepted.plan, state.slots.clone()));
    let created = Created {
        id,
        status: Status::Pending,
        expected_records: accepted.expected_records,
    };
    Ok((axum::http::StatusCode::CREATED, Json(created)).into_response())
}

async fn session_status(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<StatusReport>, ApiError> {
    Ok(Json(state.session(&id)?.report()))
}

async fn abort_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<StatusReport>, ApiError> {
    let session = state.session(&id)?;
    session.abort();
    Ok(Json(session.report()))
}

async fn get_artifact(
    State(state): State<AppState>,
    Path((id, kind)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let kind: ArtifactKind = kind.parse()?;
    let artifact = session.artifact(&kind).await?;
    Ok(([(header::CONTENT_TYPE, artifact.content_type)], artifact.bytes.clone()).into_response())
}

/// Replays every buffered record, follows the live tail, and closes after
/// the single terminal `status` event. A `Last-Event-ID` header resumes
/// after that step.
async fn stream_events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let session = state.session(&id)?;
    let from = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map_or(0, |last| last + 1);
    Ok(Sse::new(event_stream(session, from)).keep_alive(KeepAlive::default()))
}

pub fn event_stream(session: Arc<Session>, from: usize) -> impl Stream<Item = Result<Event, Infallible>> {
    let rx = session.subscribe();
    stream::unfold(Some((session, rx, from)), |state| async move {
        let (session, mut rx, cursor) = state?;
        loop {
            // mark the current version seen before reading, so nothing
            // published after the read is missed
            rx.borrow_and_update();
            let (batch, done) = session.read_from(cursor);
            if let Some((last, _)) = batch.last() {
                let next = last + 1;
                let events: Vec<Event> = batch
                    .into_iter()
                    .map(|(step, data)| Event::default().event("record").id(step.to_string()).data(data))
                    .collect();
                return Some((events, Some((session, rx, next))));
            }
            if let Some(report) = done {
                let data = serde_json::to_string(&report).expect("report serializes");
                return Some((vec![Event::default().event("status").data(data)], None));
            }
            if rx.changed().await.is_err() {
                return None;
            }
        }
    })
    .flat_map(|events| stream::iter(events.into_iter().map(Ok)))
}
