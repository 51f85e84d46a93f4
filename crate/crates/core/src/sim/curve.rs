use serde::{Deserialize, Serialize};

use super::{knn_accuracy, simulate_batch, SimConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::pipeline::{ModelState, Pipeline, PipelineConfig};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub pipeline: Pipeline,
    pub seed: u64,
    /// Index 0 is the layout before any interaction.
    pub accuracies: Vec<f64>,
}

/// Alternates simulated interaction, model update and layout refresh,
/// scoring every layout with leave-one-out kNN.
///
/// The model only ever sees an unlabeled copy of `corpus`.
pub fn run_learning_curve(
    pipeline: Pipeline,
    corpus: &Corpus,
    sim: &SimConfig,
    cfg: &PipelineConfig,
) -> Result<LearningCurve> {
    sim.validate(corpus.len())?;
    let labels = corpus
        .labels()
        .ok_or_else(|| Error::InvalidCorpus("learning curves need a fully labeled corpus".into()))?;
    let blind = corpus.without_labels();
    let mut state = ModelState::init(pipeline, &blind, cfg)?;
    let mut analyst_rng = rng::derived(sim.seed, 40);

    let mut accuracies = Vec::with_capacity(sim.iterations + 1);
    let layout = state.forward(&blind, cfg)?;
    accuracies.push(knn_accuracy(&layout, &labels, sim.knn_k)?);
    for _ in 0..sim.iterations {
        let picked = simulate_batch(corpus, sim, &mut analyst_rng)?;
        state.update(&blind, &picked.batch, cfg)?;
        let layout = state.forward(&blind, cfg)?;
        accuracies.push(knn_accuracy(&layout, &labels, sim.knn_k)?);
    }
    Ok(LearningCurve { pipeline, seed: sim.seed, accuracies })
}
