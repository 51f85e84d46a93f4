use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::pipeline::Projection;

/// Leave-one-out kNN accuracy of `labels` in the 2D layout.
pub fn knn_accuracy(projection: &Projection, labels: &[usize], k: usize) -> Result<f64> {
    knn_accuracy_points(projection.positions.view(), labels, k)
}

/// Leave-one-out kNN accuracy over the rows of `points`.
///
/// Each point is classified by majority label among its `k` nearest other
/// points (Euclidean, ties in distance broken by lower index). A tie in the
/// vote goes to whichever tied label occurs first in distance order, i.e. to
/// the nearest neighbor's label whenever that label is among the tied ones.
pub fn knn_accuracy_points(points: ArrayView2<f64>, labels: &[usize], k: usize) -> Result<f64> {
    let n = points.nrows();
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} points", labels.len())));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidConfig(format!("knn k must be in 1..{n}, got {k}")));
    }
    let n_labels = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut neighbors: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    let mut votes = vec![0usize; n_labels];
    let mut correct = 0usize;
    for i in 0..n {
        neighbors.clear();
        let pi = points.row(i);
        for j in (0..n).filter(|&j| j != i) {
            let pj = points.row(j);
            let d2: f64 = pi.iter().zip(pj.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            neighbors.push((d2, j));
        }
        neighbors.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &mut neighbors[..k];
        nearest.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        votes.fill(0);
        for &(_, j) in nearest.iter() {
            votes[labels[j]] += 1;
        }
        let best = *votes.iter().max().expect("non-empty");
        let predicted = nearest
            .iter()
            .map(|&(_, j)| labels[j])
            .find(|&l| votes[l] == best)
            .expect("some label reaches the max");
        if predicted == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn separated_clusters_score_one() {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (c, (cx, cy)) in [(-0.8, -0.8), (0.8, -0.8), (-0.8, 0.8), (0.8, 0.8)].iter().enumerate() {
            for k in 0..6 {
                pts.push(cx + 0.01 * k as f64);
                pts.push(cy - 0.01 * k as f64);
                labels.push(c);
            }
        }
        let p = Array2::from_shape_vec((24, 2), pts).unwrap();
        assert_eq!(knn_accuracy_points(p.view(), &labels, 5).unwrap(), 1.0);
    }

    #[test]
    fn hand_built_six_points() {
        // x positions on a line: 0, 1, 2, 10, 11, 13 with labels a a b b b a
        // k = 3:
        //  p0 (a): nbrs 1(a),2(b),3(b) -> b wrong
        //  p1 (a): nbrs 0(a),2(b),3(b) -> b wrong
        //  p2 (b): nbrs 1(a),0(a),3(b) -> a wrong
        //  p3 (b): nbrs 4(b),5(a),2(b) -> b right
        //  p4 (b): nbrs 3(b),5(a),2(b) -> b right
        //  p5 (a): nbrs 4(b),3(b),2(b) -> b wrong
        let p = array![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [10.0, 0.0], [11.0, 0.0], [13.0, 0.0]];
        let labels = [0, 0, 1, 1, 1, 0];
        assert!((knn_accuracy_points(p.view(), &labels, 3).unwrap() - 2.0 / 6.0).abs() < 1e-15);
        // k = 1 is the nearest neighbor rule: p0->a ok, p1->a ok, p2->a wrong,
        // p3->b ok, p4->b ok, p5->b wrong
        assert!((knn_accuracy_points(p.view(), &labels, 1).unwrap() - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn vote_tie_goes_to_nearest_label() {
        // Point 0 has neighbors 1 (label 1, nearest) and 2 (label 0); k = 2 ties.
        let p = array![[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [50.0, 50.0]];
        let labels = [0, 1, 0, 1];
        // p0: tie {1,0}, nearest is label 1 -> wrong
        // p1: nbrs 0 (d=1, label 0), 2 (d=√5, label 0) -> 0, wrong
        // p2: nbrs 0 (d=2, label 0), 1 (d=√5, label 1) -> tie, nearest 0 -> right
        // p3: nbrs 2, 1 (both far) -> p2 at d²=50²+48², p1 at 49²+50²: p2 nearer... label 0 -> wrong
        assert!((knn_accuracy_points(p.view(), &labels, 2).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_k() {
        let p = array![[0.0, 0.0], [1.0, 0.0]];
        assert!(knn_accuracy_points(p.view(), &[0, 1], 2).is_err());
        assert!(knn_accuracy_points(p.view(), &[0, 1], 0).is_err());
        assert!(knn_accuracy_points(p.view(), &[0], 1).is_err());
    }
}
