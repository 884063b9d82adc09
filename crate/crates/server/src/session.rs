//! One run and everything a subscriber can ask of it.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Instant;

use serde::Serialize;
use tokio::sync::{watch, Semaphore};
use vqh_core::config::RunPlan;
use vqh_core::sonify::{Frame, LiveNormalizer, DEFAULT_FRAME_DURATION};
use vqh_core::vqe::{Flow, IterationRecord, RunResult, VqeError};

use crate::artifacts::{Artifact, ArtifactKind};
use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    #[default]
    Pending,
    Running,
    Done,
    Aborted,
    Failed,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        matches!(self, Status::Done | Status::Aborted | Status::Failed)
    }

    fn can_become(self, next: Status) -> bool {
        match self {
            Status::Pending => matches!(next, Status::Running | Status::Aborted | Status::Failed),
            Status::Running => next.is_terminal(),
            _ => false,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Pending => "pending",
            Status::Running => "running",
            Status::Done => "done",
            Status::Aborted => "aborted",
            Status::Failed => "failed",
        };
        f.write_str(s)
    }
}

/// Body of `GET /sessions/{id}` and of the terminal `status` event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatusReport {
    pub id: String,
    pub status: Status,
    pub records: usize,
    pub expected_records: usize,
    pub last_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_expectation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Default)]
struct Log {
    status: Status,
    /// Record event payloads, index = step.
    frames: Vec<String>,
    records: Vec<IterationRecord>,
    result: Option<RunResult>,
    error: Option<String>,
}

pub struct Session {
    pub id: String,
    pub config: serde_json::Value,
    pub labels: Vec<String>,
    expected: usize,
    log: Mutex<Log>,
    /// Bumped on every change to `log`.
    version: watch::Sender<u64>,
    abort: AtomicBool,
    artifacts: tokio::sync::Mutex<HashMap<String, Arc<Artifact>>>,
    touched: Mutex<Instant>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Session {
    pub fn new(id: String, config: serde_json::Value, labels: Vec<String>, expected: usize) -> Self {
        Self {
            id,
            config,
            labels,
            expected,
            log: Mutex::default(),
            version: watch::channel(0).0,
            abort: AtomicBool::new(false),
            artifacts: tokio::sync::Mutex::default(),
            touched: Mutex::new(Instant::now()),
        }
    }

    pub fn touch(&self) {
        *lock(&self.touched) = Instant::now();
    }

    pub fn idle_since(&self) -> Instant {
        *lock(&self.touched)
    }

    pub fn status(&self) -> Status {
        lock(&self.log).status
    }

    pub fn report(&self) -> StatusReport {
        let log = lock(&self.log);
        self.report_locked(&log)
    }

    fn report_locked(&self, log: &Log) -> StatusReport {
        StatusReport {
            id: self.id.clone(),
            status: log.status,
            records: log.records.len(),
            expected_records: self.expected,
            last_step: log.records.last().map(|r| r.step),
            final_expectation: log.result.as_ref().map(|r| r.final_expectation),
            error: log.error.clone(),
        }
    }

    fn bump(&self) {
        self.version.send_modify(|v| *v += 1);
    }

    /// Applies a legal status change; false when the session has moved on.
    fn transition(&self, next: Status, finish: impl FnOnce(&mut Log)) -> bool {
        let mut log = lock(&self.log);
        if !log.status.can_become(next) {
            return false;
        }
        log.status = next;
        finish(&mut log);
        drop(log);
        self.bump();
        true
    }

    fn push(&self, record: &IterationRecord, u: f64) {
        let mut log = lock(&self.log);
        let index = log.frames.len();
        let frame = Frame {
            step: record.step,
            segment: record.segment,
            time: index as f64 * DEFAULT_FRAME_DURATION,
            marginals: record.marginals.0.clone(),
            expectation: record.expectation,
            u,
        };
        log.frames.push(frame.to_json_line(&self.labels, DEFAULT_FRAME_DURATION));
        log.records.push(record.clone());
        drop(log);
        self.bump();
    }

    /// Requests a stop. A pending session is aborted on the spot; a running
    /// one stops after its current record. Terminal sessions are untouched.
    pub fn abort(&self) -> Status {
        self.abort.store(true, Ordering::SeqCst);
        self.transition(Status::Aborted, |_| {});
        self.status()
    }

    pub fn subscribe(&self) -> watch::Receiver<u64> {
        self.version.subscribe()
    }

    /// Record payloads from `from` on, plus the final report once the
    /// session is terminal and nothing remains to send.
    pub fn read_from(&self, from: usize) -> (Vec<(usize, String)>, Option<StatusReport>) {
        let log = lock(&self.log);
        let start = from.min(log.frames.len());
        let batch: Vec<(usize, String)> = log.frames[start..]
            .iter()
            .enumerate()
            .map(|(i, f)| (start + i, f.clone()))
            .collect();
        let done = (batch.is_empty() && log.status.is_terminal()).then(|| self.report_locked(&log));
        (batch, done)
    }

    /// What artifacts are rendered from: the full result, or the partial
    /// records of an aborted run.
    fn renderable(&self) -> Result<RunResult, ApiError> {
        let log = lock(&self.log);
        if !log.status.is_terminal() {
            return Err(ApiError::NotTerminal(log.status));
        }
        if let Some(result) = &log.result {
            return Ok(result.clone());
        }
        let last = log.records.last().ok_or(ApiError::NoRecords)?;
        Ok(RunResult {
            records: log.records.clone(),
            final_params: last.params.clone(),
            final_expectation: last.expectation,
            ground_truth: None,
            stages: Vec::new(),
        })
    }

    /// Renders once per kind; later calls return the cached bytes.
    pub async fn artifact(self: &Arc<Self>, kind: &ArtifactKind) -> Result<Arc<Artifact>, ApiError> {
        let mut cache = self.artifacts.lock().await;
        if let Some(hit) = cache.get(&kind.to_string()) {
            return Ok(hit.clone());
        }
        let run = self.renderable()?;
        let labels = self.labels.clone();
        let k = kind.clone();
        let artifact = tokio::task::spawn_blocking(move || k.render(&run, &labels))
            .await
            .map_err(|e| ApiError::Render(e.to_string()))??;
        let artifact = Arc::new(artifact);
        cache.insert(kind.to_string(), artifact.clone());
        Ok(artifact)
    }
}

/// Waits for a worker slot, then runs the plan on the blocking pool,
/// publishing every record as it lands.
pub async fn drive(session: Arc<Session>, plan: RunPlan, slots: Arc<Semaphore>) {
    let Ok(_slot) = slots.acquire_owned().await else {
        return;
    };
    if !session.transition(Status::Running, |_| {}) {
        return;
    }
    let worker = session.clone();
    let outcome = tokio::task::spawn_blocking(move || {
        let mut live = LiveNormalizer::default();
        let mut recorder = |r: &IterationRecord| {
            worker.push(r, live.push(r.expectation));
            if worker.abort.load(Ordering::SeqCst) {
                Flow::Stop
            } else {
                Flow::Continue
            }
        };
        plan.vqe.run_schedule(&plan.schedule, &plan.initial, &mut recorder)
    })
    .await;
    match outcome {
        Ok(Ok(result)) => {
            session.transition(Status::Done, |log| log.result = Some(result));
        }
        Ok(Err(VqeError::Aborted { partial })) => {
            log::info!("session {} aborted after {} records", session.id, partial.len());
            session.transition(Status::Aborted, |_| {});
        }
        Ok(Err(e)) => {
            session.transition(Status::Failed, |log| log.error = Some(e.to_string()));
        }
        Err(e) => {
            session.transition(Status::Failed, |log| log.error = Some(format!("worker panicked: {e}")));
        }
    }
}
