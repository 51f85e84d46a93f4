use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Residual two-layer MLP: `h = x + W2·relu(W1·x + b1) + b2`.
///
/// The output branch starts at zero so a fresh backbone is the identity map
/// and the initial layout reflects the input representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackboneParams {
    /// H×D
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    /// D×H
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Intermediate values kept from a forward pass for backprop.
#[derive(Debug, Clone)]
pub struct BackboneCache {
    /// N×H pre-activations `W1·x + b1`.
    pub pre: Array2<f64>,
    /// N×H activations `relu(pre)`.
    pub act: Array2<f64>,
    /// N×D outputs.
    pub out: Array2<f64>,
}

impl BackboneParams {
    /// He-initialized first layer (variance `2/D`), zero output branch.
    pub fn init(dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        if dim < 2 || hidden < 1 {
            return Err(Error::InvalidConfig(format!(
                "backbone needs dim >= 2 and hidden >= 1 (got {dim}, {hidden})"
            )));
        }
        let normal = Normal::new(0.0, (2.0 / dim as f64).sqrt()).expect("positive std");
        let mut r = rng::derived(seed, 10);
        let w1 = Array2::from_shape_fn((hidden, dim), |_| normal.sample(&mut r));
        let b1 = Array1::from_shape_fn(hidden, |_| normal.sample(&mut r));
        Ok(BackboneParams {
            w1,
            b1,
            w2: Array2::zeros((dim, hidden)),
            b2: Array1::zeros(dim),
        })
    }

    pub fn zeros(dim: usize, hidden: usize) -> Self {
        BackboneParams {
            w1: Array2::zeros((hidden, dim)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((dim, hidden)),
            b2: Array1::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(x)?.out)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<BackboneCache> {
        if x.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "backbone expects {} columns, got {}",
                self.dim(),
                x.ncols()
            )));
        }
        let pre = x.dot(&self.w1.t()) + &self.b1;
        let act = pre.mapv(|a| a.max(0.0));
        let out = &x + &act.dot(&self.w2.t()) + &self.b2;
        Ok(BackboneCache { pre, act, out })
    }

    /// Parameter gradients given `dL/dh` (N×D) and the forward cache.
    pub(crate) fn backward(
        &self,
        x: ArrayView2<f64>,
        cache: &BackboneCache,
        grad_out: ArrayView2<f64>,
    ) -> BackboneParams {
        let w2 = grad_out.t().dot(&cache.act);
        let b2 = grad_out.sum_axis(Axis(0));
        let mut grad_pre = grad_out.dot(&self.w2);
        grad_pre.zip_mut_with(&cache.pre, |g, &a| {
            if a <= 0.0 {
                *g = 0.0;
            }
        });
        let w1 = grad_pre.t().dot(&x);
        let b1 = grad_pre.sum_axis(Axis(0));
        BackboneParams { w1, b1, w2, b2 }
    }

    pub(crate) fn tensors(&self) -> [&[f64]; 4] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }
}
