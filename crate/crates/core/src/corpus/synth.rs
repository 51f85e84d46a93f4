use ndarray::Array1;
use rand_distr::{Distribution, StandardNormal};

use super::{Corpus, DocRecord};
use crate::error::{Error, Result};
use crate::rng;

/// Gaussian blobs around `k` centers that are pairwise exactly one unit apart.
///
/// Centers are `q_c / √2` for a seeded random orthonormal set `q_0..q_{k-1}`,
/// so `k` may not exceed `dim`. Document `c-i` has label `c`.
pub fn synth_clusters(k: usize, n_per: usize, dim: usize, spread: f64, seed: u64) -> Result<Corpus> {
    if k < 2 || n_per < 1 || dim < 2 {
        return Err(Error::InvalidConfig(format!(
            "synth_clusters needs k >= 2, n_per >= 1, dim >= 2 (got k={k}, n_per={n_per}, dim={dim})"
        )));
    }
    if k > dim {
        return Err(Error::InvalidConfig(format!(
            "cannot place {k} unit-separated orthogonal centers in {dim} dimensions"
        )));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::InvalidConfig("spread must be finite and >= 0".into()));
    }

    let mut center_rng = rng::derived(seed, 0);
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Array1<f64> =
            Array1::from_shape_fn(dim, |_| StandardNormal.sample(&mut center_rng));
        for q in &basis {
            let proj = v.dot(q);
            v.scaled_add(-proj, q);
        }
        let norm = v.dot(&v).sqrt();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;

    let mut noise_rng = rng::derived(seed, 1);
    let mut docs = Vec::with_capacity(k * n_per);
    for (c, q) in basis.iter().enumerate() {
        for i in 0..n_per {
            let vector = q
                .iter()
                .map(|&x| {
                    let z: f64 = StandardNormal.sample(&mut noise_rng);
                    x * scale + spread * z
                })
                .collect();
            docs.push(DocRecord {
                id: format!("c{c}-{i}"),
                text: None,
                label: Some(c),
                vector: Some(vector),
            });
        }
    }
    Corpus::new(docs)
}
