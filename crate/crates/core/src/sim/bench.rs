use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{simulate_batch, SimConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::pipeline::{ModelState, Pipeline, PipelineConfig, StageTimes};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub pipeline: Pipeline,
    pub n: usize,
    pub mean_s: f64,
    pub std_s: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
}

impl TimingTable {
    pub fn rows_for(&self, pipeline: Pipeline) -> impl Iterator<Item = &TimingRow> {
        self.rows.iter().filter(move |r| r.pipeline == pipeline)
    }
}

/// Mean seconds per stage of one cycle for one pipeline and size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBreakdown {
    pub pipeline: Pipeline,
    pub n: usize,
    pub stages: BTreeMap<String, f64>,
}

impl StageBreakdown {
    /// Share of the cycle spent in `stage`.
    pub fn fraction(&self, stage: &str) -> f64 {
        let total: f64 = self.stages.values().sum();
        if total > 0.0 {
            self.stages.get(stage).copied().unwrap_or(0.0) / total
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub table: TimingTable,
    pub stages: Vec<StageBreakdown>,
}

/// Times one update-plus-refresh cycle per repeat, for every pipeline and
/// size. Each model is warmed with one untimed cycle; every repeat then
/// applies a fresh simulated batch to a copy of that warmed state, so the
/// spread reflects batch-to-batch variation rather than training drift.
/// Runs strictly sequentially.
pub fn run_timing_benchmark(
    pipelines: &[Pipeline],
    corpus_family: &dyn Fn(usize) -> Result<Corpus>,
    sizes: &[usize],
    repeats: usize,
    cfg: &PipelineConfig,
    sim: &SimConfig,
) -> Result<BenchReport> {
    if repeats < 1 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    if let Some(&bad) = sizes.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidConfig(format!("dataset size {bad} is too small")));
    }
    let mut report = BenchReport::default();
    for &pipeline in pipelines {
        for &n in sizes {
            let corpus = corpus_family(n)?;
            let blind = corpus.without_labels();
            let mut state = ModelState::init(pipeline, &blind, cfg)?;
            let mut analyst = rng::derived(sim.seed, 50 + n as u64);

            state.forward(&blind, cfg)?;
            let warm = simulate_batch(&corpus, sim, &mut analyst)?;
            state.update(&blind, &warm.batch, cfg)?;
            state.forward(&blind, cfg)?;

            let mut samples = Vec::with_capacity(repeats);
            let mut stages = StageTimes::default();
            for _ in 0..repeats {
                let picked = simulate_batch(&corpus, sim, &mut analyst)?;
                let mut trial = state.clone();
                let start = Instant::now();
                trial.update(&blind, &picked.batch, cfg)?;
                let update = start.elapsed();
                let (_, mut times) = trial.forward_timed(&blind, cfg)?;
                let total = start.elapsed();
                times.update = update;
                stages.add(&times);
                samples.push(total.as_secs_f64());
            }

            let mean = samples.iter().sum::<f64>() / repeats as f64;
            let std = if repeats > 1 {
                (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64).sqrt()
            } else {
                0.0
            };
            report.table.rows.push(TimingRow { pipeline, n, mean_s: mean, std_s: std, repeats });

            let r = repeats as f64;
            let projection_stage = match pipeline {
                Pipeline::DeepSi => "mds",
                Pipeline::NeuralSi => "head",
            };
            let stages = BTreeMap::from([
                ("update".to_string(), stages.update.as_secs_f64() / r),
                ("backbone".to_string(), stages.backbone.as_secs_f64() / r),
                (projection_stage.to_string(), stages.projection.as_secs_f64() / r),
                ("normalize".to_string(), stages.normalize.as_secs_f64() / r),
            ]);
            report.stages.push(StageBreakdown { pipeline, n, stages });
        }
    }
    Ok(report)
}

/// Least-squares slope of `ln(mean_s)` against `ln(n)`.
pub fn loglog_exponent<'a>(rows: impl IntoIterator<Item = &'a TimingRow>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .into_iter()
        .filter(|r| r.mean_s > 0.0)
        .map(|r| ((r.n as f64).ln(), r.mean_s.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
