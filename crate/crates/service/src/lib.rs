//! HTTP front end for interactive sessions.
//!
//! | route                         | effect                                  |
//! |-------------------------------|-----------------------------------------|
//! | `POST /sessions`              | `{dpi, config}`; starts a session (201) |
//! | `GET /sessions`               | summaries of all sessions               |
//! | `GET /sessions/{id}`          | diagnoses, question, counters, history  |
//! | `POST /sessions/{id}/answer`  | `{outcome, idempotency_key}` (202)      |
//! | `GET /sessions/{id}/log`      | completed iterations as JSON lines      |
//!
//! Engine runs happen on a blocking worker after the request returns; while
//! one is in flight the session reports `computing`. Errors are
//! `{code, message}`.

pub mod store;

use std::io;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use seqdiag_core::session::{log_to_jsonl, IterationRecord, Session, SessionConfig, Status};
use seqdiag_core::{Acquired, ComponentSet, Counters, Dpi};
use serde::{Deserialize, Serialize};
use tokio::sync::OwnedMutexGuard;

use store::{AcceptedAnswer, ApiError, Entry, Job, Record, Store};

#[derive(Debug, Clone)]
pub struct AppState {
    store: Arc<Store>,
}

impl AppState {
    /// Opens the data directory and resumes any engine work that was in
    /// flight when the previous process stopped. Must run inside a Tokio
    /// runtime.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<AppState> {
        let state = AppState {
            store: Arc::new(Store::open(dir)?),
        };
        for entry in state.store.all() {
            if entry.snapshot().job.is_some() {
                let guard = entry
                    .mutation
                    .clone()
                    .try_lock_owned()
                    .expect("no mutation runs before startup completes");
                spawn_job(state.clone(), entry, guard);
            }
        }
        Ok(state)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/log", get(get_log))
        .with_state(state)
}

#[derive(Debug)]
struct HttpError(StatusCode, ApiError);

impl HttpError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        HttpError(status, ApiError::new(code, message))
    }

    fn not_found(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "not_found",
            format!("no session `{id}`"),
        )
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl IntoResponse for HttpError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type HttpResult<T> = Result<T, HttpError>;

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> HttpResult<T> {
    serde_json::from_slice(body)
        .map_err(|e| HttpError::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DiagnosisView {
    pub axioms: ComponentSet,
    pub label: String,
    pub probability: f64,
}

/// What clients see of a session.
#[derive(Debug, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub status: String,
    pub created_ms: u64,
    pub config: SessionConfig,
    /// Completed iterations.
    pub iterations: usize,
    /// Leading diagnoses of the current iteration.
    pub diagnoses: Vec<DiagnosisView>,
    pub question: Option<String>,
    pub final_diagnosis: Option<DiagnosisView>,
    pub counters: Counters,
    pub acquired: Acquired,
    pub history: Vec<IterationRecord>,
    pub error: Option<ApiError>,
}

fn diagnosis_view(session: &Session, d: ComponentSet) -> DiagnosisView {
    DiagnosisView {
        axioms: d,
        label: d.to_string(),
        probability: session.ranking().pr.node_probability(d),
    }
}

fn view(record: &Record) -> SessionView {
    let mut v = SessionView {
        id: record.id.clone(),
        status: record.status().into(),
        created_ms: record.created_ms,
        config: record.config.clone(),
        iterations: 0,
        diagnoses: Vec::new(),
        question: None,
        final_diagnosis: None,
        counters: Counters::default(),
        acquired: Acquired::new(),
        history: Vec::new(),
        error: record.error.clone(),
    };
    if let Some(s) = &record.session {
        v.iterations = s.log().len();
        v.diagnoses = s
            .diagnoses()
            .iter()
            .map(|&d| diagnosis_view(s, d))
            .collect();
        v.counters = s.counters();
        v.acquired = s.acquired().clone();
        v.history = s.log().to_vec();
        match s.status() {
            Status::AwaitingAnswer { point } if record.job.is_none() => {
                v.question = Some(point.to_string())
            }
            Status::Done { diagnosis } => v.final_diagnosis = Some(diagnosis_view(s, *diagnosis)),
            Status::Failed { code, message } => {
                v.error = Some(ApiError::new(code, message.clone()))
            }
            _ => {}
        }
    }
    v
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub status: String,
    pub created_ms: u64,
    pub iterations: usize,
    pub question: Option<String>,
}

#[derive(Debug, Deserialize)]
struct CreateRequest {
    dpi: String,
    #[serde(default)]
    config: SessionConfig,
}

#[derive(Debug, Deserialize)]
struct AnswerRequest {
    outcome: bool,
    #[serde(default)]
    idempotency_key: Option<String>,
}

async fn persist(state: &AppState, record: Record) -> io::Result<Record> {
    let store = state.store.clone();
    tokio::task::spawn_blocking(move || store.persist(&record).map(|()| record))
        .await
        .map_err(io::Error::other)?
}

/// Runs `entry`'s pending job on a blocking worker, then persists and
/// publishes the result. `guard` is released when the job is done.
fn spawn_job(state: AppState, entry: Arc<Entry>, guard: OwnedMutexGuard<()>) {
    tokio::task::spawn_blocking(move || {
        let _guard = guard;
        let mut next = (*entry.snapshot()).clone();
        match next.job.take() {
            Some(Job::Start) => match Dpi::parse(&next.dpi)
                .map_err(Into::into)
                .and_then(|dpi| Session::start(dpi, next.config.clone()))
            {
                Ok(s) => next.session = Some(s),
                Err(e) => next.error = Some(ApiError::from(&e)),
            },
            Some(Job::Answer { outcome }) => {
                if let Some(s) = next.session.as_mut() {
                    // a failure ends up in the session's status
                    let _ = s.answer(outcome);
                }
            }
            None => return,
        }
        if let Err(e) = state.store.persist(&next) {
            eprintln!("session {}: could not persist: {e}", next.id);
        }
        entry.publish(next);
    });
}

async fn create_session(
    State(state): State<AppState>,
    body: Bytes,
) -> HttpResult<impl IntoResponse> {
    let req: CreateRequest = parse_body(&body)?;
    let dpi = Dpi::parse(&req.dpi)
        .map_err(|e| HttpError::new(StatusCode::BAD_REQUEST, "invalid_dpi", e.to_string()))?;
    Session::check_inputs(&dpi, &req.config)
        .map_err(|e| HttpError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))?;

    let record = Record::new(uuid::Uuid::new_v4().to_string(), req.dpi, req.config);
    let record = persist(&state, record).await.map_err(HttpError::internal)?;
    let body = view(&record);
    let entry = state.store.insert(record);
    let guard = entry
        .mutation
        .clone()
        .try_lock_owned()
        .expect("a new session has no other users");
    spawn_job(state, entry, guard);
    Ok((StatusCode::CREATED, Json(body)))
}

async fn list_sessions(State(state): State<AppState>) -> Json<Vec<SessionSummary>> {
    let mut out: Vec<SessionSummary> = state
        .store
        .all()
        .into_iter()
        .map(|e| {
            let v = view(&e.snapshot());
            SessionSummary {
                id: v.id,
                status: v.status,
                created_ms: v.created_ms,
                iterations: v.iterations,
                question: v.question,
            }
        })
        .collect();
    out.sort_by(|a, b| (a.created_ms, &a.id).cmp(&(b.created_ms, &b.id)));
    Json(out)
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> HttpResult<Json<SessionView>> {
    let entry = state
        .store
        .get(&id)
        .ok_or_else(|| HttpError::not_found(&id))?;
    Ok(Json(view(&entry.snapshot())))
}

async fn get_log(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> HttpResult<impl IntoResponse> {
    let entry = state
        .store
        .get(&id)
        .ok_or_else(|| HttpError::not_found(&id))?;
    let record = entry.snapshot();
    let log = record.session.as_ref().map_or(&[][..], |s| s.log());
    Ok((
        [(header::CONTENT_TYPE, "application/x-ndjson")],
        log_to_jsonl(log),
    ))
}

// An earlier submission with the same key: the same answer gets the
// current state back, a different one is refused.
fn replayed(
    record: &Record,
    key: &str,
    outcome: bool,
) -> Option<HttpResult<(StatusCode, Json<SessionView>)>> {
    let prev = record.answers.iter().find(|a| a.key == key)?;
    Some(if prev.outcome == outcome {
        Ok((StatusCode::OK, Json(view(record))))
    } else {
        Err(HttpError::new(
            StatusCode::CONFLICT,
            "idempotency_key_reused",
            format!("key `{key}` was already used with outcome {}", prev.outcome),
        ))
    })
}

async fn answer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> HttpResult<(StatusCode, Json<SessionView>)> {
    let entry = state
        .store
        .get(&id)
        .ok_or_else(|| HttpError::not_found(&id))?;
    let req: AnswerRequest = parse_body(&body)?;
    let key = req
        .idempotency_key
        .filter(|k| !k.trim().is_empty())
        .ok_or_else(|| {
            HttpError::new(
                StatusCode::BAD_REQUEST,
                "missing_idempotency_key",
                "idempotency_key is required",
            )
        })?;
    if let Some(r) = replayed(&entry.snapshot(), &key, req.outcome) {
        return r;
    }
    let not_awaiting = |status: &str| {
        HttpError::new(
            StatusCode::CONFLICT,
            "not_awaiting_answer",
            format!("session is {status}"),
        )
    };
    let Ok(guard) = entry.mutation.clone().try_lock_owned() else {
        return Err(not_awaiting("computing"));
    };
    // re-read now that no job can change it
    let current = entry.snapshot();
    if let Some(r) = replayed(&current, &key, req.outcome) {
        return r;
    }
    if current.status() != "awaiting-answer" {
        return Err(not_awaiting(current.status()));
    }
    let mut next = (*current).clone();
    next.job = Some(Job::Answer {
        outcome: req.outcome,
    });
    next.answers.push(AcceptedAnswer {
        key,
        outcome: req.outcome,
    });
    let next = persist(&state, next).await.map_err(HttpError::internal)?;
    let body = view(&next);
    entry.publish(next);
    spawn_job(state, entry, guard);
    Ok((StatusCode::ACCEPTED, Json(body)))
}
