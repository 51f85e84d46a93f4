//! JSON-over-HTTP session service.
//!
//! Corpora are uploaded once and shared by any number of sessions. Each
//! session is guarded by its own mutex that is held only for bookkeeping;
//! model training runs on the blocking pool and commits when done, so reads
//! during training see the last committed layout.

mod api;
mod error;

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use axum::routing::{get, post};
use axum::Router;
use semint_core::session::Session;
use semint_core::Corpus;

pub use api::*;
pub use error::{ApiError, ErrorBody};

pub struct AppState {
    corpora: RwLock<BTreeMap<String, Arc<Corpus>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    snapshot_dir: PathBuf,
    next_id: AtomicU64,
}

impl AppState {
    /// Snapshots are written to and read from `snapshot_dir`.
    pub fn new(snapshot_dir: impl Into<PathBuf>) -> Arc<AppState> {
        Arc::new(AppState {
            corpora: RwLock::new(BTreeMap::new()),
            sessions: RwLock::new(HashMap::new()),
            snapshot_dir: snapshot_dir.into(),
            next_id: AtomicU64::new(1),
        })
    }

    /// Registers a corpus under `id`, replacing nothing: ids are unique.
    pub fn add_corpus(&self, id: impl Into<String>, corpus: Corpus) -> Result<(), ApiError> {
        let id = id.into();
        let mut corpora = self.corpora.write().unwrap_or_else(|p| p.into_inner());
        if corpora.contains_key(&id) {
            return Err(ApiError::Conflict(format!("corpus {id:?} already exists")));
        }
        corpora.insert(id, Arc::new(corpus));
        Ok(())
    }

    fn corpus(&self, id: &str) -> Result<Arc<Corpus>, ApiError> {
        self.corpora
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("corpus {id:?}")))
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("session {id:?}")))
    }

    fn fresh_id(&self, prefix: &str) -> String {
        format!("{prefix}-{}", self.next_id.fetch_add(1, Ordering::Relaxed))
    }
}

pub(crate) fn lock(session: &Mutex<Session>) -> MutexGuard<'_, Session> {
    session.lock().unwrap_or_else(|p| p.into_inner())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/corpora", post(api::upload_corpus).get(api::list_corpora))
        .route("/sessions", post(api::create_session))
        .route("/sessions/load", post(api::load_session))
        .route("/sessions/{id}/projection", get(api::get_projection))
        .route("/sessions/{id}/interactions", post(api::submit_interactions))
        .route("/sessions/{id}/update", post(api::trigger_update))
        .route("/sessions/{id}/status", get(api::get_status))
        .route("/sessions/{id}/history", get(api::get_history))
        .route("/sessions/{id}/save", post(api::save_session))
        .with_state(state)
}

/// Serves on an already bound listener until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
