use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::Json;
use serde::{Deserialize, Serialize};
use semint_core::corpus::{embed_tfidf_capped, DEFAULT_TARGET_DIM};
use semint_core::session::{Session, SessionStatus};
use semint_core::{Corpus, Error as CoreError, InteractionBatch, Pipeline, PipelineConfig};

use crate::{lock, ApiError, AppState};

type ApiResult<T> = Result<T, ApiError>;

fn body<T>(json: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    json.map(|Json(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 128
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
        && !name.starts_with('.')
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub corpus_id: String,
    pub n_docs: usize,
    pub dim: usize,
    pub labeled: bool,
    pub label_count: usize,
}

impl CorpusInfo {
    fn new(id: &str, c: &Corpus) -> CorpusInfo {
        CorpusInfo {
            corpus_id: id.to_string(),
            n_docs: c.len(),
            dim: c.dim().unwrap_or(0),
            labeled: c.is_fully_labeled(),
            label_count: c.label_count(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct UploadQuery {
    pub id: Option<String>,
    /// Target dimension when documents carry only text.
    pub tfidf_dim: Option<usize>,
}

/// `POST /corpora`: JSONL body, one document per line. Text-only corpora are
/// vectorized with TF-IDF; if the requested dimension exceeds the achievable
/// rank, the rank is used instead.
pub async fn upload_corpus(
    State(app): State<Arc<AppState>>,
    q: Result<Query<UploadQuery>, QueryRejection>,
    data: Bytes,
) -> ApiResult<(StatusCode, Json<CorpusInfo>)> {
    let q = query(q)?;
    let id = match q.id {
        Some(id) if valid_name(&id) => id,
        Some(id) => return Err(ApiError::BadRequest(format!("invalid corpus id {id:?}"))),
        None => app.fresh_id("corpus"),
    };
    let target = q.tfidf_dim.unwrap_or(DEFAULT_TARGET_DIM);
    let corpus = tokio::task::spawn_blocking(move || -> Result<Corpus, CoreError> {
        let corpus = Corpus::read_jsonl(&data[..])?;
        if corpus.is_vectorized() {
            return Ok(corpus);
        }
        embed_tfidf_capped(&corpus, target).map(|(c, _)| c)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    let info = CorpusInfo::new(&id, &corpus);
    app.add_corpus(id, corpus)?;
    Ok((StatusCode::CREATED, Json(info)))
}

pub async fn list_corpora(State(app): State<Arc<AppState>>) -> Json<Vec<CorpusInfo>> {
    let corpora = app.corpora.read().unwrap_or_else(|p| p.into_inner());
    Json(corpora.iter().map(|(id, c)| CorpusInfo::new(id, c)).collect())
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub corpus_id: String,
    pub pipeline: String,
    #[serde(default)]
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub id: String,
    pub x: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionView {
    pub session_id: String,
    pub pipeline: Pipeline,
    pub iteration: u64,
    pub status: SessionStatus,
    pub degenerate: bool,
    pub points: Vec<Point>,
}

fn projection_view(s: &Session, iteration: Option<u64>) -> ApiResult<ProjectionView> {
    let p = s.projection(iteration)?;
    let points = s
        .corpus()
        .docs()
        .iter()
        .zip(p.positions.rows())
        .map(|(d, r)| Point { id: d.id.clone(), x: r[0], y: r[1], label: d.label })
        .collect();
    Ok(ProjectionView {
        session_id: s.id.clone(),
        pipeline: p.pipeline,
        iteration: p.iteration,
        status: s.status(),
        degenerate: p.degenerate,
        points,
    })
}

/// `POST /sessions`: initializes the model and returns the initial layout.
pub async fn create_session(
    State(app): State<Arc<AppState>>,
    req: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<ProjectionView>)> {
    let req = body(req)?;
    let pipeline: Pipeline = req.pipeline.parse()?;
    let corpus = app.corpus(&req.corpus_id)?;
    let id = app.fresh_id("session");
    let corpus_id = req.corpus_id.clone();
    let session_id = id.clone();
    let session = tokio::task::spawn_blocking(move || {
        Session::create(session_id, corpus_id, corpus, pipeline, req.config)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    let view = projection_view(&session, None)?;
    app.sessions
        .write()
        .unwrap_or_else(|p| p.into_inner())
        .insert(id, Arc::new(std::sync::Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

#[derive(Debug, Default, Deserialize)]
pub struct ProjectionQuery {
    pub iteration: Option<u64>,
}

pub async fn get_projection(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<ProjectionQuery>, QueryRejection>,
) -> ApiResult<Json<ProjectionView>> {
    let q = query(q)?;
    let session = app.session(&id)?;
    let guard = lock(&session);
    Ok(Json(projection_view(&guard, q.iteration)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accepted {
    pub session_id: String,
    pub queued_batches: usize,
}

/// `POST /sessions/{id}/interactions`: validates and queues a batch.
pub async fn submit_interactions(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    req: Result<Json<InteractionBatch>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Accepted>)> {
    let batch = body(req)?;
    let session = app.session(&id)?;
    let mut guard = lock(&session);
    guard.submit(batch)?;
    Ok((StatusCode::ACCEPTED, Json(Accepted { session_id: id, queued_batches: guard.queued().len() })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateStarted {
    pub session_id: String,
    pub status: SessionStatus,
    pub moves: usize,
}

/// `POST /sessions/{id}/update`: starts a background training job on the
/// queued interactions. Poll `/status` for completion.
pub async fn trigger_update(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<(StatusCode, Json<UpdateStarted>)> {
    let session = app.session(&id)?;
    let job = lock(&session).begin_update()?;
    let moves = job.batch().len();
    let worker = tokio::task::spawn_blocking(move || job.run());
    let target = Arc::clone(&session);
    tokio::spawn(async move {
        let outcome = worker
            .await
            .unwrap_or_else(|e| Err(CoreError::UpdateFailed(e.to_string())));
        // Failures are reported through the status endpoint.
        let _ = lock(&target).finish_update(outcome);
    });
    Ok((StatusCode::ACCEPTED, Json(UpdateStarted { session_id: id, status: SessionStatus::Training, moves })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusView {
    pub session_id: String,
    pub corpus_id: String,
    pub pipeline: Pipeline,
    pub status: SessionStatus,
    pub iteration: u64,
    pub history_len: usize,
    pub queued_batches: usize,
    pub last_error: Option<String>,
}

pub async fn get_status(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<StatusView>> {
    let session = app.session(&id)?;
    let s = lock(&session);
    Ok(Json(StatusView {
        session_id: s.id.clone(),
        corpus_id: s.corpus_id.clone(),
        pipeline: s.pipeline,
        status: s.status(),
        iteration: s.latest().iteration,
        history_len: s.history().len(),
        queued_batches: s.queued().len(),
        last_error: s.last_error().map(str::to_string),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryItem {
    pub iteration: u64,
    pub batch: Option<InteractionBatch>,
}

/// `GET /sessions/{id}/history`: the applied batches in order. Layouts are
/// fetched per iteration from `/projection`.
pub async fn get_history(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<Vec<HistoryItem>>> {
    let session = app.session(&id)?;
    let s = lock(&session);
    Ok(Json(
        s.history()
            .iter()
            .map(|h| HistoryItem { iteration: h.iteration, batch: h.batch.clone() })
            .collect(),
    ))
}

#[derive(Debug, Default, Deserialize)]
pub struct SaveRequest {
    /// Snapshot name inside the service's snapshot directory; defaults to
    /// the session id.
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Saved {
    pub session_id: String,
    pub name: String,
    pub path: String,
    pub iteration: u64,
}

/// `POST /sessions/{id}/save`: writes the last committed state. An update
/// still in flight is not part of the snapshot.
pub async fn save_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    req: Option<Json<SaveRequest>>,
) -> ApiResult<Json<Saved>> {
    let name = req.and_then(|Json(r)| r.name).unwrap_or_else(|| id.clone());
    if !valid_name(&name) {
        return Err(ApiError::BadRequest(format!("invalid snapshot name {name:?}")));
    }
    let session = app.session(&id)?;
    let snapshot = lock(&session).clone();
    let path = app.snapshot_dir.join(format!("{name}.json"));
    let iteration = snapshot.latest().iteration;
    let written = path.clone();
    tokio::task::spawn_blocking(move || -> Result<(), CoreError> {
        if let Some(dir) = written.parent() {
            std::fs::create_dir_all(dir)?;
        }
        snapshot.save(&written)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(Json(Saved { session_id: id, name, path: path.display().to_string(), iteration }))
}

#[derive(Debug, Deserialize)]
pub struct LoadRequest {
    pub name: String,
}

/// `POST /sessions/load`: restores a snapshot under its original session id.
/// The embedded corpus is registered if its id is not taken.
pub async fn load_session(
    State(app): State<Arc<AppState>>,
    req: Result<Json<LoadRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<ProjectionView>)> {
    let req = body(req)?;
    if !valid_name(&req.name) {
        return Err(ApiError::BadRequest(format!("invalid snapshot name {:?}", req.name)));
    }
    let path = app.snapshot_dir.join(format!("{}.json", req.name));
    let session = tokio::task::spawn_blocking(move || Session::load(path))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let view = projection_view(&session, None)?;
    {
        let mut sessions = app.sessions.write().unwrap_or_else(|p| p.into_inner());
        if sessions.contains_key(&session.id) {
            return Err(ApiError::Conflict(format!("session {:?} is already live", session.id)));
        }
        let _ = app.add_corpus(session.corpus_id.clone(), session.corpus().clone());
        sessions.insert(session.id.clone(), Arc::new(std::sync::Mutex::new(session)));
    }
    Ok((StatusCode::CREATED, Json(view)))
}
