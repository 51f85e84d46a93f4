//! Dense numerical kernel: residual-MLP backbone, linear projection head,
//! analytic gradients, Adam and a finite-difference gradient checker.
//!
//! Gradients are derived by hand for exactly the two model shapes the
//! pipelines use (backbone alone, backbone followed by head).

mod adam;
mod backbone;
mod gradcheck;
mod head;
mod model;
mod stress;

pub use adam::AdamState;
pub use backbone::{BackboneCache, BackboneParams};
pub use gradcheck::finite_diff_check;
pub use head::HeadParams;
pub use model::{backprop_through_model, model_loss_and_grad, ModelParams};
pub use stress::{grad_pairwise_stress, pairwise_stress, PairTarget};
