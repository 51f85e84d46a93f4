//! A persistable interactive session around one pipeline.
//!
//! Model updates are split into [`Session::begin_update`], which drains the
//! queue and marks the session busy, a label-free [`UpdateJob`] that can run
//! anywhere, and [`Session::finish_update`], which commits the result. A host
//! that holds the session behind a lock only needs the lock for the first and
//! last step.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::pipeline::{InteractionBatch, ModelState, Move, Pipeline, PipelineConfig, Projection};

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    #[default]
    Idle,
    Training,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: u64,
    pub projection: Projection,
    /// The batch whose update produced this layout; `None` for the initial one.
    pub batch: Option<InteractionBatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub corpus_id: String,
    /// Full corpus including labels, for display and snapshots.
    corpus: Arc<Corpus>,
    /// The same documents without labels; the only copy pipelines ever see.
    #[serde(skip)]
    blind: Option<Arc<Corpus>>,
    pub pipeline: Pipeline,
    pub config: PipelineConfig,
    state: ModelState,
    history: Vec<HistoryEntry>,
    queue: Vec<InteractionBatch>,
    #[serde(skip)]
    status: SessionStatus,
    #[serde(default)]
    last_error: Option<String>,
}

/// Everything one update needs, detached from the session.
#[derive(Debug, Clone)]
pub struct UpdateJob {
    state: ModelState,
    corpus: Arc<Corpus>,
    batch: InteractionBatch,
    config: PipelineConfig,
}

#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    state: ModelState,
    batch: InteractionBatch,
    projection: Projection,
    pub loss_trace: Vec<f64>,
}

impl UpdateJob {
    pub fn batch(&self) -> &InteractionBatch {
        &self.batch
    }

    pub fn run(mut self) -> Result<UpdateOutcome> {
        let loss_trace = self.state.update(&self.corpus, &self.batch, &self.config)?;
        let projection = self.state.forward(&self.corpus, &self.config)?;
        Ok(UpdateOutcome { state: self.state, batch: self.batch, projection, loss_trace })
    }
}

impl Session {
    /// Initializes the model and records the iteration-0 layout.
    pub fn create(
        id: impl Into<String>,
        corpus_id: impl Into<String>,
        corpus: Arc<Corpus>,
        pipeline: Pipeline,
        config: PipelineConfig,
    ) -> Result<Session> {
        config.validate()?;
        let blind = Arc::new(corpus.without_labels());
        let mut state = ModelState::init(pipeline, &blind, &config)?;
        let projection = state.forward(&blind, &config)?;
        Ok(Session {
            id: id.into(),
            corpus_id: corpus_id.into(),
            corpus,
            blind: Some(blind),
            pipeline,
            config,
            history: vec![HistoryEntry { iteration: projection.iteration, projection, batch: None }],
            state,
            queue: Vec::new(),
            status: SessionStatus::Idle,
            last_error: None,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    fn blind(&self) -> &Arc<Corpus> {
        self.blind.as_ref().expect("set on create and on load")
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn queued(&self) -> &[InteractionBatch] {
        &self.queue
    }

    pub fn last_error(&self) -> Option<&str> {
        self.last_error.as_deref()
    }

    pub fn latest(&self) -> &Projection {
        &self.history.last().expect("history starts with the initial layout").projection
    }

    /// The layout at `iteration`, or the latest one.
    pub fn projection(&self, iteration: Option<u64>) -> Result<&Projection> {
        match iteration {
            None => Ok(self.latest()),
            Some(it) => self
                .history
                .iter()
                .find(|h| h.iteration == it)
                .map(|h| &h.projection)
                .ok_or(Error::UnknownIteration { requested: it, latest: self.latest().iteration }),
        }
    }

    /// Validates and queues a batch. Nothing is trained until an update.
    pub fn submit(&mut self, batch: InteractionBatch) -> Result<()> {
        if self.status == SessionStatus::Training {
            return Err(Error::Busy);
        }
        batch.resolve(&self.corpus)?;
        self.queue.push(batch);
        Ok(())
    }

    /// Drains the queue into one job and marks the session as training.
    /// Queued batches are merged; a document moved in several of them keeps
    /// its most recent drop position.
    pub fn begin_update(&mut self) -> Result<UpdateJob> {
        if self.status == SessionStatus::Training {
            return Err(Error::Busy);
        }
        if self.queue.is_empty() {
            return Err(Error::NothingQueued);
        }
        let batch = merge_batches(std::mem::take(&mut self.queue));
        self.status = SessionStatus::Training;
        Ok(UpdateJob {
            state: self.state.clone(),
            corpus: Arc::clone(self.blind()),
            batch,
            config: self.config.clone(),
        })
    }

    /// Commits a finished job. A failed job leaves the model untouched.
    pub fn finish_update(&mut self, outcome: Result<UpdateOutcome>) -> Result<&Projection> {
        self.status = SessionStatus::Idle;
        match outcome {
            Ok(done) => {
                self.state = done.state;
                self.last_error = None;
                self.history.push(HistoryEntry {
                    iteration: done.projection.iteration,
                    projection: done.projection,
                    batch: Some(done.batch),
                });
                Ok(self.latest())
            }
            Err(e) => {
                self.last_error = Some(e.to_string());
                Err(e)
            }
        }
    }

    /// Runs a queued update in place.
    pub fn update_now(&mut self) -> Result<&Projection> {
        let job = self.begin_update()?;
        let outcome = job.run();
        self.finish_update(outcome)
    }

    /// Rebuilds the session from scratch and re-applies every recorded batch,
    /// returning the layouts in history order.
    pub fn replay(&self) -> Result<Vec<Projection>> {
        let mut fresh = Session::create(
            self.id.clone(),
            self.corpus_id.clone(),
            Arc::clone(&self.corpus),
            self.pipeline,
            self.config.clone(),
        )?;
        for entry in self.history.iter().skip(1) {
            let batch = entry
                .batch
                .clone()
                .ok_or_else(|| Error::InvalidBatch("history entry without a batch".into()))?;
            fresh.submit(batch)?;
            fresh.update_now()?;
        }
        Ok(fresh.history.into_iter().map(|h| h.projection).collect())
    }

    pub fn to_snapshot(&self) -> Snapshot<'_> {
        Snapshot { format_version: SNAPSHOT_FORMAT_VERSION, session: std::borrow::Cow::Borrowed(self) }
    }

    pub fn write_snapshot(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer(w, &self.to_snapshot())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_snapshot(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn from_snapshot_str(text: &str) -> Result<Session> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format_version != SNAPSHOT_FORMAT_VERSION {
            return Err(Error::SnapshotVersion { found: header.format_version, expected: SNAPSHOT_FORMAT_VERSION });
        }
        let snapshot: Snapshot<'static> = serde_json::from_str(text)?;
        let mut session = snapshot.session.into_owned();
        session.blind = Some(Arc::new(session.corpus.without_labels()));
        session.status = SessionStatus::Idle;
        session.check_consistent()?;
        Ok(session)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Session> {
        let mut text = String::new();
        std::io::Read::read_to_string(&mut BufReader::new(File::open(path)?), &mut text)?;
        Session::from_snapshot_str(&text)
    }

    fn check_consistent(&self) -> Result<()> {
        self.config.validate()?;
        let bad = |m: &str| Err(Error::InvalidConfig(format!("snapshot is inconsistent: {m}")));
        if self.history.is_empty() {
            return bad("empty history");
        }
        if self.history.windows(2).any(|w| w[1].iteration <= w[0].iteration) {
            return bad("history iterations are not increasing");
        }
        if self.state.pipeline != self.pipeline {
            return bad("model state belongs to another pipeline");
        }
        if self.state.params.backbone.dim() != self.corpus.dim().unwrap_or(0) {
            return bad("model dimension does not match the corpus");
        }
        if self.history.iter().any(|h| h.projection.positions.nrows() != self.corpus.len()) {
            return bad("layout size does not match the corpus");
        }
        Ok(())
    }
}

/// Versioned on-disk form of a session.
#[derive(Debug, Serialize, Deserialize)]
pub struct Snapshot<'a> {
    pub format_version: u32,
    pub session: std::borrow::Cow<'a, Session>,
}

fn merge_batches(batches: Vec<InteractionBatch>) -> InteractionBatch {
    let mut slot: HashMap<String, usize> = HashMap::new();
    let mut moves: Vec<Move> = Vec::new();
    for m in batches.into_iter().flat_map(|b| b.moves) {
        match slot.get(&m.id) {
            Some(&i) => moves[i] = m,
            None => {
                slot.insert(m.id.clone(), moves.len());
                moves.push(m);
            }
        }
    }
    InteractionBatch::new(moves)
}
