//! Small dense helpers shared by the numeric modules.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{ArrayView1, ArrayView2};

pub(crate) fn to_nalgebra(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn euclidean(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Full symmetric pairwise distance matrix of the rows of `x`.
#[cfg(test)]
pub(crate) fn pairwise_distances(x: ArrayView2<f64>) -> ndarray::Array2<f64> {
    let n = x.nrows();
    let mut d = ndarray::Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = euclidean(x.row(i), x.row(j));
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue.
pub(crate) fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Flips each column so its largest-magnitude entry is positive.
pub(crate) fn canonical_signs(v: &mut DMatrix<f64>) {
    for c in 0..v.ncols() {
        let mut best = 0.0f64;
        for r in 0..v.nrows() {
            if v[(r, c)].abs() > best.abs() {
                best = v[(r, c)];
            }
        }
        if best < 0.0 {
            v.column_mut(c).neg_mut();
        }
    }
}
