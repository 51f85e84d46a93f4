//! Semantic-interaction engine for human-in-the-loop dimensionality reduction.
//!
//! Two pipelines turn a corpus of document vectors into a 2D layout and learn
//! from points an analyst drags around that layout:
//!
//! * [`Pipeline::DeepSi`]: a tunable backbone followed by metric MDS. Drags tune
//!   the backbone only and every refresh re-solves MDS from scratch.
//! * [`Pipeline::NeuralSi`]: the same backbone followed by a linear projection
//!   head, trained end to end. A refresh is a single forward pass.
//!
//! The [`sim`] module replaces the analyst with a simulator and scores layouts
//! with leave-one-out kNN accuracy; [`session`] wraps a pipeline into a
//! persistable interactive session.

pub mod corpus;
pub mod error;
pub mod mds;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod session;
pub mod sim;

pub(crate) mod linalg;

pub use corpus::{Corpus, DocRecord};
pub use error::{Error, Result};
pub use pipeline::{
    HeadInit, InteractionBatch, ModelState, Move, Pipeline, PipelineConfig, Projection,
};
