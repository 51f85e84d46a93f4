use std::time::Instant;

use super::{normalize_viewport, InteractionBatch, ModelState, Pipeline, PipelineConfig, Projection, StageTimes};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::mds::mds_project;

/// Backbone then MDS from scratch (or from the previous layout when warm
/// starts are enabled). The head, if any, is ignored.
pub fn deepsi_forward(state: &mut ModelState, corpus: &Corpus, cfg: &PipelineConfig) -> Result<Projection> {
    Ok(forward_timed(state, corpus, cfg)?.0)
}

pub(super) fn forward_timed(
    state: &mut ModelState,
    corpus: &Corpus,
    cfg: &PipelineConfig,
) -> Result<(Projection, StageTimes)> {
    let mut times = StageTimes::default();
    let t = Instant::now();
    let h = state.params.backbone.forward(corpus.matrix()?.view())?;
    times.backbone = t.elapsed();

    let t = Instant::now();
    let warm = if cfg.mds_warm_start {
        state.last_raw_layout.as_ref().filter(|l| l.nrows() == h.nrows())
    } else {
        None
    };
    let result = mds_project(h.view(), &cfg.mds, warm.map(|w| w.view()))?;
    times.projection = t.elapsed();

    let t = Instant::now();
    let positions = normalize_viewport(result.layout.view());
    times.normalize = t.elapsed();
    if cfg.mds_warm_start {
        state.last_raw_layout = Some(result.layout);
    }
    let projection = Projection {
        positions,
        iteration: state.iteration,
        pipeline: Pipeline::DeepSi,
        degenerate: result.degenerate,
    };
    Ok((projection, times))
}

/// Tunes the backbone so representation distances of the moved points follow
/// their viewport distances. Returns the per-epoch loss trace.
pub fn deepsi_update(
    state: &mut ModelState,
    corpus: &Corpus,
    batch: &InteractionBatch,
    cfg: &PipelineConfig,
) -> Result<Vec<f64>> {
    if state.pipeline != Pipeline::DeepSi || state.params.head.is_some() {
        return Err(Error::InvalidConfig("deepsi_update needs a DeepSI model state".into()));
    }
    state.update(corpus, batch, cfg)
}
