//! Metric MDS into two dimensions by SMACOF stress majorization.
//!
//! Minimizes the raw stress `Σ_{i<j} (‖z_i − z_j‖ − ‖h_i − h_j‖)²` with unit
//! weights. Each Guttman transform is guaranteed not to increase stress, so
//! the recorded stress sequence is monotone. An iterate that would increase
//! stress through roundoff is discarded and the solver stops.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{canonical_signs, euclidean, sorted_symmetric_eigen, to_nalgebra};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdsInit {
    /// Projection onto the top two principal axes.
    Pca,
    /// Start from the supplied warm-start layout.
    Given,
    /// Seeded uniform start in the unit square.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdsConfig {
    pub max_iters: usize,
    /// Stop once the relative stress decrease falls below this.
    pub tol: f64,
    pub init: MdsInit,
    pub seed: u64,
}

impl Default for MdsConfig {
    fn default() -> Self {
        MdsConfig { max_iters: 300, tol: 1e-6, init: MdsInit::Pca, seed: 0 }
    }
}

impl MdsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig("mds max_iters must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("mds tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MdsResult {
    /// N×2 layout, centered.
    pub layout: Array2<f64>,
    pub stress: f64,
    /// Stress of the starting layout followed by every accepted iterate.
    pub stress_history: Vec<f64>,
    pub iterations: usize,
    /// All input rows coincide; the layout is all zeros.
    pub degenerate: bool,
}

/// Condensed upper-triangle distance storage, row-major over `i < j`.
struct Dissimilarities {
    n: usize,
    values: Vec<f64>,
}

impl Dissimilarities {
    fn from_rows(h: ArrayView2<f64>) -> Self {
        let n = h.nrows();
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                values.push(euclidean(h.row(i), h.row(j)));
            }
        }
        Dissimilarities { n, values }
    }

    fn sum_sq(&self) -> f64 {
        self.values.iter().map(|d| d * d).sum()
    }
}

/// Stress of `points` and the Guttman transform `B(X)·X / N` in one pass.
fn stress_and_guttman(points: &[[f64; 2]], delta: &Dissimilarities) -> (f64, Vec<[f64; 2]>) {
    let n = delta.n;
    let mut next = vec![[0.0f64; 2]; n];
    let mut stress = 0.0;
    let mut k = 0;
    for i in 0..n {
        let pi = points[i];
        for j in (i + 1)..n {
            let target = delta.values[k];
            k += 1;
            let dx = pi[0] - points[j][0];
            let dy = pi[1] - points[j][1];
            let d = (dx * dx + dy * dy).sqrt();
            let r = d - target;
            stress += r * r;
            if d > 0.0 {
                let ratio = target / d;
                let (gx, gy) = (ratio * dx, ratio * dy);
                next[i][0] += gx;
                next[i][1] += gy;
                next[j][0] -= gx;
                next[j][1] -= gy;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    for p in &mut next {
        p[0] *= inv_n;
        p[1] *= inv_n;
    }
    (stress, next)
}

fn layout_stress(points: &[[f64; 2]], delta: &Dissimilarities) -> f64 {
    let mut stress = 0.0;
    let mut k = 0;
    for i in 0..delta.n {
        for j in (i + 1)..delta.n {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            let r = (dx * dx + dy * dy).sqrt() - delta.values[k];
            stress += r * r;
            k += 1;
        }
    }
    stress
}

/// Centered projection of `h` onto its two leading principal axes.
pub fn pca_layout(h: ArrayView2<f64>) -> Array2<f64> {
    let (n, d) = h.dim();
    let mut centered = to_nalgebra(h);
    for c in 0..d {
        let mean = centered.column(c).mean();
        centered.column_mut(c).add_scalar_mut(-mean);
    }
    let mut out = Array2::zeros((n, 2));
    if d <= n {
        let (_, mut vecs) = sorted_symmetric_eigen(centered.transpose() * &centered);
        canonical_signs(&mut vecs);
        let proj = &centered * vecs.columns(0, 2.min(d));
        for i in 0..n {
            for k in 0..proj.ncols() {
                out[[i, k]] = proj[(i, k)];
            }
        }
    } else {
        let (vals, mut vecs) = sorted_symmetric_eigen(&centered * centered.transpose());
        canonical_signs(&mut vecs);
        for k in 0..2.min(n) {
            let s = vals[k].max(0.0).sqrt();
            for i in 0..n {
                out[[i, k]] = vecs[(i, k)] * s;
            }
        }
    }
    out
}

/// Projects the rows of `h` to 2D by SMACOF.
///
/// With `MdsInit::Given` the warm start is required; with other inits a
/// supplied warm start overrides the init.
pub fn mds_project(
    h: ArrayView2<f64>,
    cfg: &MdsConfig,
    warm_start: Option<ArrayView2<f64>>,
) -> Result<MdsResult> {
    cfg.validate()?;
    let n = h.nrows();
    if n < 2 {
        return Err(Error::Shape("mds needs at least two points".into()));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::Shape("mds input contains non-finite values".into()));
    }
    let delta = Dissimilarities::from_rows(h);
    let total = delta.sum_sq();
    if total == 0.0 {
        return Ok(MdsResult {
            layout: Array2::zeros((n, 2)),
            stress: 0.0,
            stress_history: vec![0.0],
            iterations: 0,
            degenerate: true,
        });
    }

    let start = match (warm_start, cfg.init) {
        (Some(w), _) => {
            if w.dim() != (n, 2) {
                return Err(Error::Shape(format!(
                    "warm start is {:?}, expected ({n}, 2)",
                    w.dim()
                )));
            }
            w.to_owned()
        }
        (None, MdsInit::Given) => {
            return Err(Error::InvalidConfig("mds init=given needs a warm start".into()))
        }
        (None, MdsInit::Pca) => pca_layout(h),
        (None, MdsInit::Random) => {
            use rand::Rng;
            let mut r = rng::derived(cfg.seed, 30);
            Array2::from_shape_fn((n, 2), |_| r.random::<f64>())
        }
    };
    let mut points: Vec<[f64; 2]> = start.rows().into_iter().map(|r| [r[0], r[1]]).collect();

    let floor = 1e-28 * total;
    let mut history = Vec::with_capacity(cfg.max_iters + 1);
    let mut iterations = 0;
    let (mut current, mut next) = stress_and_guttman(&points, &delta);
    history.push(current);
    while iterations < cfg.max_iters && current > floor {
        let (candidate, after) = stress_and_guttman(&next, &delta);
        if candidate > current {
            break;
        }
        iterations += 1;
        points = next;
        next = after;
        history.push(candidate);
        let improvement = (current - candidate) / current;
        current = candidate;
        if improvement < cfg.tol {
            break;
        }
    }

    let layout = Array2::from_shape_fn((n, 2), |(i, k)| points[i][k]);
    Ok(MdsResult { layout, stress: current, stress_history: history, iterations, degenerate: false })
}

/// Raw stress `Σ_{i<j} (‖z_i − z_j‖ − ‖h_i − h_j‖)²`.
pub fn stress(z: ArrayView2<f64>, h: ArrayView2<f64>) -> Result<f64> {
    if z.nrows() != h.nrows() || z.ncols() != 2 {
        return Err(Error::Shape(format!(
            "layout is {:?}, data has {} rows",
            z.dim(),
            h.nrows()
        )));
    }
    let points: Vec<[f64; 2]> = z.rows().into_iter().map(|r| [r[0], r[1]]).collect();
    Ok(layout_stress(&points, &Dissimilarities::from_rows(h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, s};

    #[test]
    fn hand_three_point_stress() {
        // h: (0,0), (3,0), (0,4) -> distances 3, 4, 5
        // z: (0,0), (1,0), (0,1) -> distances 1, 1, √2
        // stress = 4 + 9 + (5 − √2)²
        let h = array![[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]];
        let z = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let expected = 4.0 + 9.0 + (5.0 - 2f64.sqrt()).powi(2);
        assert!((stress(z.view(), h.view()).unwrap() - expected).abs() < 1e-12);

        let perm = [2, 0, 1];
        let hp = Array2::from_shape_fn((3, 2), |(i, k)| h[[perm[i], k]]);
        let zp = Array2::from_shape_fn((3, 2), |(i, k)| z[[perm[i], k]]);
        assert!((stress(zp.view(), hp.view()).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_stress_for_leading_coordinates() {
        let h = array![[0.0, 1.0, 0.0], [2.0, -1.0, 0.0], [0.5, 0.5, 0.0]];
        assert_eq!(stress(h.slice(s![.., 0..2]), h.view()).unwrap(), 0.0);
    }

    #[test]
    fn two_points_keep_their_distance() {
        let h = array![[1.0, 2.0, 3.0], [4.0, 6.0, 3.0]];
        let r = mds_project(h.view(), &MdsConfig::default(), None).unwrap();
        let d = euclidean(r.layout.row(0), r.layout.row(1));
        assert!((d - 5.0).abs() < 1e-6);
    }

    #[test]
    fn identical_rows_are_degenerate() {
        let h = Array2::from_elem((4, 3), 0.7);
        let r = mds_project(h.view(), &MdsConfig::default(), None).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.stress, 0.0);
        assert!(r.layout.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn stress_history_is_monotone_from_random_start() {
        let h = Array2::from_shape_fn((25, 6), |(i, j)| ((i * 13 + j * 7) as f64 * 0.61).sin());
        let cfg = MdsConfig { init: MdsInit::Random, seed: 9, ..Default::default() };
        let r = mds_project(h.view(), &cfg, None).unwrap();
        assert!(r.iterations > 1);
        for w in r.stress_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!((stress(r.layout.view(), h.view()).unwrap() - r.stress).abs() < 1e-9 * r.stress.max(1.0));
    }

    #[test]
    fn warm_start_never_ends_worse() {
        let h = Array2::from_shape_fn((15, 4), |(i, j)| ((i * 5 + j * 3) as f64 * 0.77).cos());
        let warm = Array2::from_shape_fn((15, 2), |(i, k)| ((i + 3 * k) as f64 * 1.3).sin());
        let before = stress(warm.view(), h.view()).unwrap();
        let cfg = MdsConfig { init: MdsInit::Given, ..Default::default() };
        let r = mds_project(h.view(), &cfg, Some(warm.view())).unwrap();
        assert!(r.stress <= before);
        assert!(mds_project(h.view(), &cfg, None).is_err());
    }

    #[test]
    fn deterministic() {
        let h = Array2::from_shape_fn((12, 5), |(i, j)| ((i * 3 + j) as f64).sqrt());
        let a = mds_project(h.view(), &MdsConfig::default(), None).unwrap();
        let b = mds_project(h.view(), &MdsConfig::default(), None).unwrap();
        assert_eq!(a.layout, b.layout);
    }

    #[test]
    fn config_validation() {
        let h = array![[0.0, 0.0], [1.0, 1.0]];
        let bad = MdsConfig { max_iters: 0, ..Default::default() };
        assert!(mds_project(h.view(), &bad, None).is_err());
        let bad = MdsConfig { tol: 0.0, ..Default::default() };
        assert!(mds_project(h.view(), &bad, None).is_err());
        assert!(mds_project(array![[1.0, 2.0]].view(), &MdsConfig::default(), None).is_err());
    }
}
