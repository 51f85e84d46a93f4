use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{AdamState, BackboneCache, BackboneParams, HeadParams, PairTarget};
use crate::error::{Error, Result};

/// Backbone plus optional projection head. Also used as the gradient
/// container, with the same shapes as the parameters it differentiates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub backbone: BackboneParams,
    pub head: Option<HeadParams>,
}

impl ModelParams {
    /// Output width: 2 with a head, D without.
    pub fn output_dim(&self) -> usize {
        if self.head.is_some() {
            2
        } else {
            self.backbone.dim()
        }
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let h = self.backbone.forward(x)?;
        match &self.head {
            Some(head) => head.forward(h.view()),
            None => Ok(h),
        }
    }

    /// Flat views of every tensor: backbone W1, b1, W2, b2, then head W.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.backbone.tensors().into();
        if let Some(head) = &self.head {
            out.push(head.tensor());
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self.backbone.tensors_mut().into();
        if let Some(head) = &mut self.head {
            out.push(head.tensor_mut());
        }
        out
    }

    pub fn tensor_lens(&self) -> Vec<usize> {
        self.tensors().iter().map(|t| t.len()).collect()
    }

    pub fn zeros_like(&self) -> ModelParams {
        ModelParams {
            backbone: BackboneParams::zeros(self.backbone.dim(), self.backbone.hidden()),
            head: self.head.as_ref().map(|h| HeadParams::zeros(h.dim())),
        }
    }

    /// Euclidean norm over all tensors.
    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// `self − other`, tensor by tensor.
    pub fn sub(&self, other: &ModelParams) -> ModelParams {
        let mut out = self.clone();
        for (a, b) in out.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x -= y;
            }
        }
        out
    }

    pub fn adam_step(&mut self, adam: &mut AdamState, grads: &ModelParams) -> Result<()> {
        let g = grads.tensors();
        let mut p = self.tensors_mut();
        adam.step(&mut p, &g)
    }
}

/// Exact parameter gradients for an upstream gradient at the model output,
/// propagated head first, then through the backbone.
pub fn backprop_through_model(
    params: &ModelParams,
    x: ArrayView2<f64>,
    loss_grad: ArrayView2<f64>,
) -> Result<ModelParams> {
    let cache = params.backbone.forward_cached(x)?;
    backprop_cached(params, x, &cache, loss_grad)
}

fn backprop_cached(
    params: &ModelParams,
    x: ArrayView2<f64>,
    cache: &BackboneCache,
    loss_grad: ArrayView2<f64>,
) -> Result<ModelParams> {
    if loss_grad.nrows() != x.nrows() || loss_grad.ncols() != params.output_dim() {
        return Err(Error::Shape(format!(
            "loss gradient is {}x{}, model output is {}x{}",
            loss_grad.nrows(),
            loss_grad.ncols(),
            x.nrows(),
            params.output_dim()
        )));
    }
    let (grad_h, head) = match &params.head {
        Some(head) => {
            let gw = loss_grad.t().dot(&cache.out);
            (loss_grad.dot(&head.w), Some(HeadParams { w: gw }))
        }
        None => (loss_grad.to_owned(), None),
    };
    let backbone = params.backbone.backward(x, cache, grad_h.view());
    Ok(ModelParams { backbone, head })
}

/// Pairwise-stress loss of the model outputs for rows of `x` and its
/// gradient with respect to every parameter.
///
/// `scale` divides predicted distances and is held constant.
pub fn model_loss_and_grad(
    params: &ModelParams,
    x: ArrayView2<f64>,
    targets: &[PairTarget],
    scale: f64,
) -> Result<(f64, ModelParams)> {
    let cache = params.backbone.forward_cached(x)?;
    let out = match &params.head {
        Some(head) => head.forward(cache.out.view())?,
        None => cache.out.clone(),
    };
    let loss = super::pairwise_stress(out.view(), targets, scale);
    let g_out = super::grad_pairwise_stress(out.view(), targets, scale);
    let grads = backprop_cached(params, x, &cache, g_out.view())?;
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn model(with_head: bool) -> ModelParams {
        let backbone = BackboneParams::init(2, 3, 5).unwrap();
        let head = with_head.then(|| HeadParams { w: array![[0.5, -1.0], [2.0, 0.25]] });
        ModelParams { backbone, head }
    }

    #[test]
    fn zero_loss_gradient_gives_zero_grads() {
        let m = model(true);
        let x = array![[0.3, -0.2], [1.0, 0.5]];
        let g = backprop_through_model(&m, x.view(), Array2::zeros((2, 2)).view()).unwrap();
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn head_gradient_at_identity_backbone() {
        // W2 = 0 -> H_in = X, so dL/dW = Gᵀ X. dL/dW2 = (G·W)ᵀ relu(W1 X + b1).
        let m = model(true);
        let x = array![[0.3, -0.2], [1.0, 0.5]];
        let g = array![[1.0, -2.0], [0.5, 0.0]];
        let grads = backprop_through_model(&m, x.view(), g.view()).unwrap();
        let expected_head = g.t().dot(&x);
        assert_eq!(grads.head.as_ref().unwrap().w, expected_head);

        let w = &m.head.as_ref().unwrap().w;
        let gh = g.dot(w);
        let act = (x.dot(&m.backbone.w1.t()) + &m.backbone.b1).mapv(|a: f64| a.max(0.0));
        let expected_w2 = gh.t().dot(&act);
        assert!((&grads.backbone.w2 - &expected_w2).iter().all(|d| d.abs() < 1e-14));
        assert!(act.iter().any(|&a| a > 0.0));
        assert!(grads.backbone.w2.iter().any(|&v| v != 0.0));
        // The first layer is cut off by W2 = 0.
        assert!(grads.backbone.w1.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_mismatched_loss_gradient() {
        let m = model(true);
        let x = array![[0.3, -0.2]];
        assert!(backprop_through_model(&m, x.view(), Array2::zeros((1, 3)).view()).is_err());
        let m = model(false);
        assert!(backprop_through_model(&m, x.view(), Array2::zeros((1, 2)).view()).is_ok());
    }

    #[test]
    fn tensor_views_cover_all_parameters() {
        let m = model(true);
        assert_eq!(m.tensor_lens(), vec![6, 3, 6, 2, 4]);
        assert_eq!(model(false).tensor_lens().len(), 4);
    }
}
