use super::ModelParams;

/// Worst per-tensor relative error between `analytic` and central
/// differences of `loss` around `params`.
///
/// Error for one tensor is `‖a − n‖ / max(‖a‖, ‖n‖, τ)` where the floor
/// `τ = 1e-6 · max(1, largest analytic tensor norm)` keeps tensors with an
/// identically zero gradient (a shared output bias under a distance-only
/// loss, say) from reporting roundoff as error. Zero loss gives zero error.
pub fn finite_diff_check<F>(params: &ModelParams, loss: F, analytic: &ModelParams, eps: f64) -> f64
where
    F: Fn(&ModelParams) -> f64,
{
    let mut probe = params.clone();
    let lens = params.tensor_lens();
    let largest = analytic
        .tensors()
        .iter()
        .map(|t| t.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    let floor = 1e-6 * largest.max(1.0);
    let mut worst = 0.0f64;
    for (k, &len) in lens.iter().enumerate() {
        let mut numeric = vec![0.0; len];
        for (i, slot) in numeric.iter_mut().enumerate() {
            let orig = probe.tensors()[k][i];
            probe.tensors_mut()[k][i] = orig + eps;
            let plus = loss(&probe);
            probe.tensors_mut()[k][i] = orig - eps;
            let minus = loss(&probe);
            probe.tensors_mut()[k][i] = orig;
            *slot = (plus - minus) / (2.0 * eps);
        }
        let a = analytic.tensors()[k];
        let diff = a.iter().zip(&numeric).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nn = numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
        worst = worst.max(diff / na.max(nn).max(floor));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{model_loss_and_grad, pairwise_stress, BackboneParams, HeadParams, PairTarget};
    use ndarray::{Array2, ArrayView2};

    fn perturbed_model(seed: u64, with_head: bool) -> ModelParams {
        let mut backbone = BackboneParams::init(4, 5, seed).unwrap();
        backbone.w2 = Array2::from_shape_fn((4, 5), |(i, j)| ((i * 5 + j) as f64 * 0.37).sin() * 0.4);
        backbone.b2.mapv_inplace(|_| 0.05);
        let head = with_head.then(|| HeadParams::he(4, seed));
        ModelParams { backbone, head }
    }

    fn data() -> (Array2<f64>, Vec<PairTarget>) {
        let x = Array2::from_shape_fn((4, 4), |(i, j)| ((i * 4 + j) as f64 * 0.91).cos());
        let mut t = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                t.push(PairTarget { i, j, distance: 0.3 + 0.2 * (i + j) as f64 });
            }
        }
        (x, t)
    }

    fn loss_fn<'a>(x: ArrayView2<'a, f64>, t: &'a [PairTarget]) -> impl Fn(&ModelParams) -> f64 + 'a {
        move |p| pairwise_stress(p.forward(x).unwrap().view(), t, 1.3)
    }

    #[test]
    fn correct_gradients_pass() {
        let (x, t) = data();
        for with_head in [false, true] {
            let p = perturbed_model(3, with_head);
            let (_, g) = model_loss_and_grad(&p, x.view(), &t, 1.3).unwrap();
            let err = finite_diff_check(&p, loss_fn(x.view(), &t), &g, 1e-5);
            assert!(err < 1e-4, "head={with_head} err={err}");
        }
    }

    #[test]
    fn corrupted_gradient_is_caught() {
        let (x, t) = data();
        let p = perturbed_model(3, true);
        let (_, mut g) = model_loss_and_grad(&p, x.view(), &t, 1.3).unwrap();
        g.backbone.w2.mapv_inplace(|v| v * 2.0);
        let err = finite_diff_check(&p, loss_fn(x.view(), &t), &g, 1e-5);
        assert!(err > 0.4, "err={err}");
    }

    #[test]
    fn zero_loss_reports_zero() {
        let p = perturbed_model(1, true);
        let err = finite_diff_check(&p, |_| 0.0, &p.zeros_like(), 1e-5);
        assert_eq!(err, 0.0);
    }
}
