use std::time::Instant;

use super::{normalize_viewport, InteractionBatch, ModelState, Pipeline, PipelineConfig, Projection, StageTimes};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// One forward pass through backbone and head, normalized to the viewport.
pub fn neuralsi_forward(state: &ModelState, corpus: &Corpus) -> Result<Projection> {
    Ok(forward_timed(state, corpus)?.0)
}

pub(super) fn forward_timed(state: &ModelState, corpus: &Corpus) -> Result<(Projection, StageTimes)> {
    let head = state
        .params
        .head
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("neuralsi_forward needs a projection head".into()))?;
    let mut times = StageTimes::default();
    let t = Instant::now();
    let h = state.params.backbone.forward(corpus.matrix()?.view())?;
    times.backbone = t.elapsed();

    let t = Instant::now();
    let raw = head.forward(h.view())?;
    times.projection = t.elapsed();

    let t = Instant::now();
    let positions = normalize_viewport(raw.view());
    times.normalize = t.elapsed();
    let degenerate = positions.iter().all(|&v| v == 0.0);
    Ok((
        Projection { positions, iteration: state.iteration, pipeline: Pipeline::NeuralSi, degenerate },
        times,
    ))
}

/// End-to-end update of head and backbone from the moved points. The loss
/// compares mean-normalized viewport distances with mean-normalized raw
/// head-output distances. Returns the per-epoch loss trace.
pub fn neuralsi_update(
    state: &mut ModelState,
    corpus: &Corpus,
    batch: &InteractionBatch,
    cfg: &PipelineConfig,
) -> Result<Vec<f64>> {
    if state.pipeline != Pipeline::NeuralSi || state.params.head.is_none() {
        return Err(Error::InvalidConfig("neuralsi_update needs a NeuralSI model state".into()));
    }
    state.update(corpus, batch, cfg)
}
