//! The two semantic-interaction pipelines.
//!
//! Both share the same backbone and the same training step: a pairwise
//! stress between the viewport distances of the moved points and the model's
//! distances for those points, each set divided by its own mean. DeepSI
//! measures model distances on backbone outputs and lays out with MDS;
//! NeuralSI measures them on raw head outputs and lays out with the head.

mod deepsi;
mod init;
mod neuralsi;
mod viewport;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::linalg::euclidean;
use crate::mds::MdsConfig;
use crate::nn::{model_loss_and_grad, AdamState, BackboneParams, ModelParams, PairTarget};

pub use deepsi::{deepsi_forward, deepsi_update};
pub use init::{head_init_mds, head_init_random, ridge_fit};
pub use neuralsi::{neuralsi_forward, neuralsi_update};
pub use viewport::normalize_viewport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    DeepSi,
    NeuralSi,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::DeepSi => "deepsi",
            Pipeline::NeuralSi => "neuralsi",
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "deepsi" => Ok(Pipeline::DeepSi),
            "neuralsi" => Ok(Pipeline::NeuralSi),
            other => Err(Error::InvalidConfig(format!(
                "unknown pipeline {other:?} (expected deepsi or neuralsi)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadInit {
    MdsBased,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceScaleMode {
    /// Divide each distance set by its mean before comparing.
    MeanNormalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub lr: f64,
    pub epochs_per_update: usize,
    /// Backbone hidden width.
    pub hidden: usize,
    pub mds: MdsConfig,
    /// Start each DeepSI MDS solve from the previous layout.
    pub mds_warm_start: bool,
    pub head_init: HeadInit,
    pub ridge_lambda: f64,
    pub seed: u64,
    pub distance_scale_mode: DistanceScaleMode,
    /// Clear Adam moments before every update.
    pub reset_optimizer: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            lr: 1e-3,
            epochs_per_update: 50,
            hidden: 64,
            mds: MdsConfig::default(),
            mds_warm_start: false,
            head_init: HeadInit::MdsBased,
            ridge_lambda: 1e-3,
            seed: 0,
            distance_scale_mode: DistanceScaleMode::MeanNormalized,
            reset_optimizer: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidConfig("lr must be > 0".into()));
        }
        if self.epochs_per_update < 1 {
            return Err(Error::InvalidConfig("epochs_per_update must be >= 1".into()));
        }
        if self.hidden < 1 {
            return Err(Error::InvalidConfig("hidden must be >= 1".into()));
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::InvalidConfig("ridge_lambda must be >= 0".into()));
        }
        self.mds.validate()
    }
}

/// One dragged document and where it was dropped, in viewport coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionBatch {
    pub moves: Vec<Move>,
}

impl InteractionBatch {
    pub fn new(moves: Vec<Move>) -> Self {
        InteractionBatch { moves }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Checks the batch against `corpus` and returns corpus indices with
    /// their drop positions.
    pub fn resolve(&self, corpus: &Corpus) -> Result<Vec<(usize, [f64; 2])>> {
        if self.moves.len() < 2 {
            return Err(Error::InvalidBatch(format!(
                "need at least 2 moved points, got {}",
                self.moves.len()
            )));
        }
        let index = corpus.index_map();
        let mut seen = HashSet::with_capacity(self.moves.len());
        self.moves
            .iter()
            .map(|m| {
                let &i = index
                    .get(m.id.as_str())
                    .ok_or_else(|| Error::InvalidBatch(format!("unknown document id {:?}", m.id)))?;
                if !seen.insert(i) {
                    return Err(Error::InvalidBatch(format!("document {:?} moved twice", m.id)));
                }
                for v in [m.x, m.y] {
                    if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                        return Err(Error::InvalidBatch(format!(
                            "position ({}, {}) of {:?} is outside the viewport",
                            m.x, m.y, m.id
                        )));
                    }
                }
                Ok((i, [m.x, m.y]))
            })
            .collect()
    }
}

/// A layout of the whole corpus in the viewport square, in corpus order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub positions: Array2<f64>,
    pub iteration: u64,
    pub pipeline: Pipeline,
    /// The projection stage collapsed every point onto one location.
    #[serde(default)]
    pub degenerate: bool,
}

/// Wall-clock time spent in each stage of a forward or update call.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub update: Duration,
    pub backbone: Duration,
    /// MDS for DeepSI, head forward for NeuralSI.
    pub projection: Duration,
    pub normalize: Duration,
}

impl StageTimes {
    pub fn total(&self) -> Duration {
        self.update + self.backbone + self.projection + self.normalize
    }

    pub fn add(&mut self, other: &StageTimes) {
        self.update += other.update;
        self.backbone += other.backbone;
        self.projection += other.projection;
        self.normalize += other.normalize;
    }
}

/// Everything a pipeline learns: parameters, optimizer state and the count
/// of applied updates. `iteration` is the index stamped on the next layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub pipeline: Pipeline,
    pub params: ModelParams,
    pub adam: AdamState,
    pub iteration: u64,
    /// Last raw (pre-normalization) DeepSI layout, kept for warm starts.
    #[serde(default)]
    pub last_raw_layout: Option<Array2<f64>>,
}

impl ModelState {
    /// Fresh backbone and, for NeuralSI, a head initialized per `cfg`.
    pub fn init(pipeline: Pipeline, corpus: &Corpus, cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let x = corpus.matrix()?;
        let backbone = BackboneParams::init(x.ncols(), cfg.hidden, cfg.seed)?;
        let head = match pipeline {
            Pipeline::DeepSi => None,
            Pipeline::NeuralSi => Some(match cfg.head_init {
                HeadInit::MdsBased => head_init_mds(&backbone, x.view(), cfg)?,
                HeadInit::Random => head_init_random(x.ncols(), cfg.seed),
            }),
        };
        let params = ModelParams { backbone, head };
        let adam = AdamState::new(cfg.lr, &params.tensor_lens());
        Ok(ModelState { pipeline, params, adam, iteration: 0, last_raw_layout: None })
    }

    pub fn forward(&mut self, corpus: &Corpus, cfg: &PipelineConfig) -> Result<Projection> {
        Ok(self.forward_timed(corpus, cfg)?.0)
    }

    pub fn forward_timed(
        &mut self,
        corpus: &Corpus,
        cfg: &PipelineConfig,
    ) -> Result<(Projection, StageTimes)> {
        match self.pipeline {
            Pipeline::DeepSi => deepsi::forward_timed(self, corpus, cfg),
            Pipeline::NeuralSi => neuralsi::forward_timed(self, corpus),
        }
    }

    /// Applies one interaction batch; returns the per-epoch loss trace.
    pub fn update(
        &mut self,
        corpus: &Corpus,
        batch: &InteractionBatch,
        cfg: &PipelineConfig,
    ) -> Result<Vec<f64>> {
        train_on_batch(self, corpus, batch, cfg)
    }
}

/// Mean-normalized viewport distances between every pair of moved points.
///
/// Pair indices refer to positions within the moved set.
pub(crate) fn batch_targets(drops: &[(usize, [f64; 2])]) -> Vec<PairTarget> {
    let mut targets = Vec::with_capacity(drops.len() * (drops.len() - 1) / 2);
    for i in 0..drops.len() {
        for j in (i + 1)..drops.len() {
            let (a, b) = (drops[i].1, drops[j].1);
            let distance = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            targets.push(PairTarget { i, j, distance });
        }
    }
    let mean = targets.iter().map(|t| t.distance).sum::<f64>() / targets.len() as f64;
    if mean > 0.0 {
        for t in &mut targets {
            t.distance /= mean;
        }
    }
    targets
}

/// Mean pairwise distance between rows named by `targets`, or 1 if zero.
pub(crate) fn mean_pair_distance(out: ArrayView2<f64>, targets: &[PairTarget]) -> f64 {
    let mean = targets
        .iter()
        .map(|t| euclidean(out.row(t.i), out.row(t.j)))
        .sum::<f64>()
        / targets.len() as f64;
    if mean > 0.0 {
        mean
    } else {
        1.0
    }
}

pub(crate) fn select_rows(x: ArrayView2<f64>, rows: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), x.ncols()), |(r, c)| x[[rows[r], c]])
}

/// Per-pair loss below which a batch counts as already matched.
const CONVERGED_LOSS: f64 = 1e-20;

/// Scaled pairwise-stress training over the moved points. Tunes every tensor
/// in `state.params`, which is the backbone alone for DeepSI and backbone plus
/// head for NeuralSI. The model-side scale is fixed at the start of the call.
fn train_on_batch(
    state: &mut ModelState,
    corpus: &Corpus,
    batch: &InteractionBatch,
    cfg: &PipelineConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let drops = batch.resolve(corpus)?;
    let rows: Vec<usize> = drops.iter().map(|d| d.0).collect();
    let x = select_rows(corpus.matrix()?.view(), &rows);
    let targets = batch_targets(&drops);
    let scale = mean_pair_distance(state.params.forward(x.view())?.view(), &targets);

    if cfg.reset_optimizer {
        state.adam.reset();
    }
    state.adam.lr = cfg.lr;
    let mut trace = Vec::with_capacity(cfg.epochs_per_update);
    for _ in 0..cfg.epochs_per_update {
        let (loss, grads) = model_loss_and_grad(&state.params, x.view(), &targets, scale)?;
        trace.push(loss);
        if loss <= CONVERGED_LOSS * targets.len() as f64 {
            // Adam rescales roundoff-sized gradients to lr-sized steps, so a
            // matched batch would otherwise wander off its optimum.
            break;
        }
        state.params.adam_step(&mut state.adam, &grads)?;
    }
    state.iteration += 1;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth_clusters;

    fn mv(id: &str, x: f64, y: f64) -> Move {
        Move { id: id.into(), x, y }
    }

    #[test]
    fn batch_validation() {
        let c = synth_clusters(2, 3, 4, 0.1, 1).unwrap();
        let ok = InteractionBatch::new(vec![mv("c0-0", 0.5, 0.5), mv("c1-2", -0.5, 1.0)]);
        assert_eq!(ok.resolve(&c).unwrap(), vec![(0, [0.5, 0.5]), (5, [-0.5, 1.0])]);

        let one = InteractionBatch::new(vec![mv("c0-0", 0.0, 0.0)]);
        assert!(one.resolve(&c).is_err());
        let unknown = InteractionBatch::new(vec![mv("c0-0", 0.0, 0.0), mv("nope", 0.0, 0.0)]);
        assert!(unknown.resolve(&c).is_err());
        let dup = InteractionBatch::new(vec![mv("c0-0", 0.0, 0.0), mv("c0-0", 0.1, 0.0)]);
        assert!(dup.resolve(&c).is_err());
        let outside = InteractionBatch::new(vec![mv("c0-0", 1.5, 0.0), mv("c0-1", 0.1, 0.0)]);
        assert!(outside.resolve(&c).is_err());
        let nan = InteractionBatch::new(vec![mv("c0-0", f64::NAN, 0.0), mv("c0-1", 0.1, 0.0)]);
        assert!(nan.resolve(&c).is_err());
    }

    #[test]
    fn targets_have_unit_mean() {
        let drops = [(0, [0.0, 0.0]), (1, [0.6, 0.0]), (2, [0.0, 0.8])];
        let t = batch_targets(&drops);
        let mean = t.iter().map(|p| p.distance).sum::<f64>() / 3.0;
        assert!((mean - 1.0).abs() < 1e-15);
        // Ratios survive normalization: 0.6 : 0.8 : 1.0
        assert!((t[0].distance / t[2].distance - 0.6).abs() < 1e-15);
    }

    #[test]
    fn pipeline_names_parse() {
        assert_eq!("NeuralSI".parse::<Pipeline>().unwrap(), Pipeline::NeuralSi);
        assert_eq!("deepsi".parse::<Pipeline>().unwrap(), Pipeline::DeepSi);
        assert!("tsne".parse::<Pipeline>().is_err());
        assert_eq!(serde_json::to_string(&Pipeline::NeuralSi).unwrap(), "\"neuralsi\"");
    }

    #[test]
    fn config_validation() {
        assert!(PipelineConfig::default().validate().is_ok());
        for bad in [
            PipelineConfig { lr: 0.0, ..Default::default() },
            PipelineConfig { epochs_per_update: 0, ..Default::default() },
            PipelineConfig { ridge_lambda: -1.0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
