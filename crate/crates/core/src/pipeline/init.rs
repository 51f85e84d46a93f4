use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};

use super::PipelineConfig;
use crate::error::{Error, Result};
use crate::linalg::{sorted_symmetric_eigen, to_nalgebra};
use crate::mds::mds_project;
use crate::nn::{BackboneParams, HeadParams};

/// Fits the head to an MDS layout of the current representations.
pub fn head_init_mds(
    backbone: &BackboneParams,
    x: ArrayView2<f64>,
    cfg: &PipelineConfig,
) -> Result<HeadParams> {
    let h = backbone.forward(x)?;
    let teacher = mds_project(h.view(), &cfg.mds, None)?;
    ridge_fit(h.view(), teacher.layout.view(), cfg.ridge_lambda)
}

pub fn head_init_random(dim: usize, seed: u64) -> HeadParams {
    HeadParams::he(dim, seed)
}

/// `argmin_W ‖H·Wᵀ − Z‖² + λ‖W‖²` in closed form.
pub fn ridge_fit(h: ArrayView2<f64>, z: ArrayView2<f64>, lambda: f64) -> Result<HeadParams> {
    if h.nrows() != z.nrows() || z.ncols() != 2 {
        return Err(Error::Shape(format!(
            "ridge fit needs matching rows and a 2-column target, got {:?} and {:?}",
            h.dim(),
            z.dim()
        )));
    }
    let hm = to_nalgebra(h);
    let zm = to_nalgebra(z);
    let d = hm.ncols();
    let mut normal = hm.transpose() * &hm;
    if lambda == 0.0 {
        let (vals, _) = sorted_symmetric_eigen(normal.clone());
        let top = vals.first().copied().unwrap_or(0.0);
        let bottom = vals.last().copied().unwrap_or(0.0);
        if top <= 0.0 || bottom <= 1e-12 * top {
            return Err(Error::SingularNormalMatrix);
        }
    }
    normal += DMatrix::<f64>::identity(d, d) * lambda;
    let rhs = hm.transpose() * zm;
    let chol = normal.cholesky().ok_or(Error::SingularNormalMatrix)?;
    let wt = chol.solve(&rhs);
    Ok(HeadParams { w: Array2::from_shape_fn((2, d), |(k, j)| wt[(j, k)]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::euclidean;
    use crate::mds::{MdsConfig};
    use ndarray::array;

    #[test]
    fn exact_fit_with_orthonormal_columns() {
        // Centered orthonormal columns: MDS recovers H up to rotation, so the
        // teacher lies in the column span and λ = 0 reproduces it exactly.
        let s = 0.5;
        let h = array![[s, s], [s, -s], [-s, s], [-s, -s]];
        let backbone = BackboneParams::init(2, 3, 0).unwrap();
        let cfg = PipelineConfig { ridge_lambda: 0.0, ..Default::default() };
        let head = head_init_mds(&backbone, h.view(), &cfg).unwrap();
        let fitted = head.forward(h.view()).unwrap();
        let teacher = mds_project(h.view(), &MdsConfig::default(), None).unwrap().layout;
        for (a, b) in fitted.iter().zip(teacher.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        // and distances are those of H
        assert!((euclidean(fitted.row(0), fitted.row(3)) - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn large_lambda_shrinks_to_zero() {
        let h = array![[1.0, 0.5, -0.2], [0.3, -1.0, 0.8], [-0.7, 0.2, 0.1]];
        let z = array![[0.5, 0.1], [-0.2, 0.4], [0.0, -0.6]];
        let w_small = ridge_fit(h.view(), z.view(), 1e-3).unwrap();
        let w_big = ridge_fit(h.view(), z.view(), 1e12).unwrap();
        assert!(w_big.w.iter().all(|v| v.abs() < 1e-9));
        assert!(w_small.w.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn singular_without_ridge_is_an_error() {
        let h = array![[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]];
        let z = array![[0.0, 1.0], [1.0, 0.0]];
        assert!(matches!(ridge_fit(h.view(), z.view(), 0.0), Err(Error::SingularNormalMatrix)));
        assert!(ridge_fit(h.view(), z.view(), 1e-3).is_ok());
    }
}
