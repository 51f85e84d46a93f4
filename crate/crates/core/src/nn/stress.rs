use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::linalg::euclidean;

/// One pair term of the pairwise stress: rows `i` and `j` should end up
/// `distance` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTarget {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

/// `Σ (target − ‖p_i − p_j‖ / scale)²` over the given pairs.
///
/// `scale` divides predicted distances only; pass `1.0` for the raw stress.
pub fn pairwise_stress(positions: ArrayView2<f64>, targets: &[PairTarget], scale: f64) -> f64 {
    targets
        .iter()
        .map(|t| {
            let d = euclidean(positions.row(t.i), positions.row(t.j)) / scale;
            (t.distance - d).powi(2)
        })
        .sum()
}

/// Gradient of [`pairwise_stress`] with respect to every row of `positions`.
///
/// Rows not mentioned by any pair get a zero gradient. A pair whose points
/// coincide contributes nothing (subgradient 0 at the distance singularity).
pub fn grad_pairwise_stress(
    positions: ArrayView2<f64>,
    targets: &[PairTarget],
    scale: f64,
) -> Array2<f64> {
    let mut grad = Array2::zeros(positions.raw_dim());
    for t in targets {
        debug_assert_ne!(t.i, t.j);
        let (pi, pj) = (positions.row(t.i), positions.row(t.j));
        let raw = euclidean(pi, pj);
        if raw == 0.0 {
            continue;
        }
        let residual = t.distance - raw / scale;
        let coeff = -2.0 * residual / (scale * raw);
        for k in 0..positions.ncols() {
            let g = coeff * (pi[k] - pj[k]);
            grad[[t.i, k]] += g;
            grad[[t.j, k]] -= g;
        }
    }
    grad
}
