//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2};
use ndarray::{Array2, ArrayView2};

/// Leave-one-out kNN by full enumeration: sort every other point by
/// (distance, index), count votes, break vote ties by the first tied label
/// met in distance order.
pub fn brute_knn(points: ArrayView2<f64>, labels: &[usize], k: usize) -> f64 {
    let n = points.nrows();
    let mut correct = 0;
    for i in 0..n {
        let mut all: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let d: f64 = (0..points.ncols()).map(|c| (points[[i, c]] - points[[j, c]]).powi(2)).sum();
                (d.sqrt(), j)
            })
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let top = &all[..k];
        let count = |l: usize| top.iter().filter(|&&(_, j)| labels[j] == l).count();
        let best = top.iter().map(|&(_, j)| count(labels[j])).max().unwrap();
        let predicted = top.iter().map(|&(_, j)| labels[j]).find(|&l| count(l) == best).unwrap();
        if predicted == labels[i] {
            correct += 1;
        }
    }
    correct as f64 / n as f64
}

fn centered(a: ArrayView2<f64>) -> Array2<f64> {
    let mean = a.mean_axis(ndarray::Axis(0)).unwrap();
    &a - &mean
}

/// RMS distance between `b` and the best rotation/reflection plus
/// translation of `a` onto it.
pub fn procrustes_rms(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    assert_eq!(a.ncols(), 2);
    let (ca, cb) = (centered(a), centered(b));
    let mut m = Matrix2::<f64>::zeros();
    for i in 0..ca.nrows() {
        for r in 0..2 {
            for c in 0..2 {
                m[(r, c)] += ca[[i, r]] * cb[[i, c]];
            }
        }
    }
    let svd = m.svd(true, true);
    let rot = svd.u.unwrap() * svd.v_t.unwrap();
    let mut sum = 0.0;
    for i in 0..ca.nrows() {
        let p: nalgebra::RowVector2<f64> = nalgebra::RowVector2::new(ca[[i, 0]], ca[[i, 1]]) * rot;
        sum += (p[0] - cb[[i, 0]]).powi(2) + (p[1] - cb[[i, 1]]).powi(2);
    }
    (sum / ca.nrows() as f64).sqrt()
}

pub fn diameter(a: ArrayView2<f64>) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.nrows() {
            let d: f64 = (0..a.ncols()).map(|c| (a[[i, c]] - a[[j, c]]).powi(2)).sum();
            best = best.max(d.sqrt());
        }
    }
    best
}

pub fn dist(a: ArrayView2<f64>, i: usize, j: usize) -> f64 {
    (0..a.ncols()).map(|c| (a[[i, c]] - a[[j, c]]).powi(2)).sum::<f64>().sqrt()
}

/// Random rotation by `theta` followed by a shift.
pub fn rigid(a: ArrayView2<f64>, theta: f64, shift: [f64; 2]) -> Array2<f64> {
    let (s, c) = theta.sin_cos();
    Array2::from_shape_fn(a.dim(), |(i, k)| {
        let (x, y) = (a[[i, 0]], a[[i, 1]]);
        if k == 0 {
            c * x - s * y + shift[0]
        } else {
            s * x + c * y + shift[1]
        }
    })
}

pub fn to_dmatrix(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[[r, c]])
}
