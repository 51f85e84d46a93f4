use rand::seq::index;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::pipeline::{InteractionBatch, Move};
use crate::rng::EngineRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorLayout {
    /// Class `c` of `K` sits at angle `2πc/K` on a circle of radius 0.8.
    Circle,
}

impl AnchorLayout {
    pub const RADIUS: f64 = 0.8;

    pub fn anchor(self, class: usize, classes: usize) -> [f64; 2] {
        match self {
            AnchorLayout::Circle => {
                let angle = std::f64::consts::TAU * class as f64 / classes as f64;
                [Self::RADIUS * angle.cos(), Self::RADIUS * angle.sin()]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub per_class: usize,
    pub iterations: usize,
    pub anchor_layout: AnchorLayout,
    pub jitter: f64,
    pub knn_k: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            per_class: 3,
            iterations: 200,
            anchor_layout: AnchorLayout::Circle,
            jitter: 0.02,
            knn_k: 5,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, n_docs: usize) -> Result<()> {
        if self.per_class < 1 {
            return Err(Error::InvalidConfig("per_class must be >= 1".into()));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::InvalidConfig("jitter must be >= 0".into()));
        }
        if self.knn_k < 1 || self.knn_k >= n_docs {
            return Err(Error::InvalidConfig(format!(
                "knn_k must be in 1..{n_docs}, got {}",
                self.knn_k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedBatch {
    pub batch: InteractionBatch,
    /// Some class had fewer than `per_class` documents; all of them were used.
    pub undersampled: bool,
}

/// Picks `per_class` random documents of every class and drops each class's
/// picks on its anchor, with Gaussian jitter clamped to the viewport.
pub fn simulate_batch(corpus: &Corpus, cfg: &SimConfig, rng: &mut EngineRng) -> Result<SimulatedBatch> {
    let labels = corpus
        .labels()
        .ok_or_else(|| Error::InvalidCorpus("simulated analyst needs every document labeled".into()))?;
    let classes = corpus.label_count();
    if classes < 2 {
        return Err(Error::InvalidCorpus("simulated analyst needs at least two classes".into()));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let noise = (cfg.jitter > 0.0).then(|| Normal::new(0.0, cfg.jitter).expect("valid std"));

    let mut moves = Vec::with_capacity(classes * cfg.per_class);
    let mut undersampled = false;
    for (class, docs) in members.iter().enumerate() {
        let take = if docs.len() < cfg.per_class {
            undersampled = true;
            docs.len()
        } else {
            cfg.per_class
        };
        let anchor = cfg.anchor_layout.anchor(class, classes);
        for pick in index::sample(rng, docs.len(), take) {
            let mut pos = anchor;
            if let Some(noise) = &noise {
                for v in &mut pos {
                    *v = (*v + noise.sample(rng)).clamp(-1.0, 1.0);
                }
            }
            moves.push(Move { id: corpus.docs()[docs[pick]].id.clone(), x: pos[0], y: pos[1] });
        }
    }
    Ok(SimulatedBatch { batch: InteractionBatch::new(moves), undersampled })
}
