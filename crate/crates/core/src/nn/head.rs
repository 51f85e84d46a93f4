use ndarray::{Array2, ArrayView2};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Linear projection head `z = W·h` with `W` of shape 2×D and no bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadParams {
    pub w: Array2<f64>,
}

impl HeadParams {
    pub fn zeros(dim: usize) -> Self {
        HeadParams { w: Array2::zeros((2, dim)) }
    }

    /// He initialization: entries drawn from `N(0, 2/D)`.
    pub fn he(dim: usize, seed: u64) -> Self {
        let normal = Normal::new(0.0, (2.0 / dim as f64).sqrt()).expect("positive std");
        let mut r = rng::derived(seed, 20);
        HeadParams { w: Array2::from_shape_fn((2, dim), |_| normal.sample(&mut r)) }
    }

    pub fn dim(&self) -> usize {
        self.w.ncols()
    }

    /// `Zraw = H · Wᵀ`, one 2D row per input row.
    pub fn forward(&self, h: ArrayView2<f64>) -> Result<Array2<f64>> {
        if h.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "head expects {} columns, got {}",
                self.dim(),
                h.ncols()
            )));
        }
        Ok(h.dot(&self.w.t()))
    }

    pub(crate) fn tensor(&self) -> &[f64] {
        self.w.as_slice().expect("standard layout")
    }

    pub(crate) fn tensor_mut(&mut self) -> &mut [f64] {
        self.w.as_slice_mut().expect("standard layout")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn selector_rows_pick_first_columns() {
        let h = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let head = HeadParams { w: array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]] };
        assert_eq!(head.forward(h.view()).unwrap(), array![[1.0, 2.0], [4.0, 5.0]]);
        assert_eq!(HeadParams::zeros(3).forward(h.view()).unwrap(), Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn matches_triple_loop_multiply() {
        let h = array![[0.3, -1.2, 2.0, 0.5], [1.1, 0.0, -0.7, 0.9], [-2.0, 0.4, 0.1, 1.3]];
        let w = array![[0.5, -0.25, 1.5, 0.0], [-1.0, 2.0, 0.75, -0.5]];
        let out = HeadParams { w: w.clone() }.forward(h.view()).unwrap();
        for i in 0..3 {
            for k in 0..2 {
                let mut acc = 0.0;
                for j in 0..4 {
                    acc += h[[i, j]] * w[[k, j]];
                }
                assert!((out[[i, k]] - acc).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn he_variance_and_determinism() {
        let a = HeadParams::he(128, 4);
        assert_eq!(a, HeadParams::he(128, 4));
        let n = a.w.len() as f64;
        let mean = a.w.sum() / n;
        let var = a.w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let he = 2.0 / 128.0;
        assert!((var - he).abs() < 0.3 * he, "variance {var}");
    }

    #[test]
    fn shape_mismatch() {
        assert!(HeadParams::zeros(3).forward(Array2::zeros((1, 4)).view()).is_err());
    }
}
