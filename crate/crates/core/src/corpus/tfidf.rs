//! Text-to-vector fallback: sublinear TF-IDF reduced by truncated SVD.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::Corpus;
use crate::error::{Error, Result};
use crate::linalg::{canonical_signs, sorted_symmetric_eigen};

pub const DEFAULT_TARGET_DIM: usize = 128;

/// Lowercases, splits on runs of non-alphanumeric characters and drops
/// tokens shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

/// Rows of L2-normalized sublinear TF-IDF over a sorted vocabulary.
pub(crate) fn tfidf_matrix(texts: &[&str]) -> Result<DMatrix<f64>> {
    let tokenized: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
    let mut vocab: BTreeMap<&str, usize> = BTreeMap::new();
    for toks in &tokenized {
        for t in toks {
            vocab.insert(t.as_str(), 0);
        }
    }
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    for (col, slot) in vocab.values_mut().enumerate() {
        *slot = col;
    }

    let n = texts.len();
    let mut counts = DMatrix::<f64>::zeros(n, vocab.len());
    for (row, toks) in tokenized.iter().enumerate() {
        for t in toks {
            counts[(row, vocab[t.as_str()])] += 1.0;
        }
    }
    let df: Vec<f64> = (0..vocab.len())
        .map(|c| counts.column(c).iter().filter(|&&x| x > 0.0).count() as f64)
        .collect();
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| ((1.0 + n as f64) / (1.0 + d)).ln() + 1.0)
        .collect();

    let mut m = counts.map(|tf| if tf > 0.0 { 1.0 + tf.ln() } else { 0.0 });
    for c in 0..m.ncols() {
        m.column_mut(c).scale_mut(idf[c]);
    }
    for r in 0..n {
        let norm = m.row(r).norm();
        if norm > 0.0 {
            m.row_mut(r).unscale_mut(norm);
        }
    }
    Ok(m)
}

/// Vectorizes every document's text and replaces its vector.
///
/// The TF-IDF rows are projected onto the top `target_dim` right singular
/// vectors, each sign-fixed so its largest-magnitude term weight is positive.
/// Output norms are at most 1 because the rows are unit length before the
/// projection.
pub fn embed_tfidf(corpus: &Corpus, target_dim: usize) -> Result<Corpus> {
    let texts = corpus
        .docs()
        .iter()
        .enumerate()
        .map(|(row, d)| {
            d.text.as_deref().ok_or_else(|| Error::InvalidRow {
                row,
                message: "document has no text to vectorize".into(),
            })
        })
        .collect::<Result<Vec<&str>>>()?;
    if target_dim < 2 {
        return Err(Error::InvalidConfig("target_dim must be at least 2".into()));
    }
    let a = tfidf_matrix(&texts)?;
    if target_dim > a.ncols() {
        return Err(Error::InvalidConfig(format!(
            "target_dim {target_dim} exceeds vocabulary size {}",
            a.ncols()
        )));
    }

    let basis = right_singular_basis(&a, target_dim)?;
    let reduced = &a * &basis;
    let vectors = (0..reduced.nrows())
        .map(|r| reduced.row(r).iter().copied().collect())
        .collect();
    corpus.with_vectors(vectors)
}

/// Like [`embed_tfidf`], but lowers `target_dim` to what the corpus can
/// support (document count, vocabulary size, numerical rank) instead of
/// failing. Returns the embedded corpus and the dimension used.
pub fn embed_tfidf_capped(corpus: &Corpus, target_dim: usize) -> Result<(Corpus, usize)> {
    let dim = target_dim.min(corpus.len()).max(2);
    match embed_tfidf(corpus, dim) {
        Ok(c) => Ok((c, dim)),
        Err(Error::RankTooLow { rank, .. }) if rank >= 2 => Ok((embed_tfidf(corpus, rank)?, rank)),
        Err(Error::InvalidConfig(_)) if dim > 2 => {
            let texts: Vec<&str> = corpus.docs().iter().filter_map(|d| d.text.as_deref()).collect();
            let vocab = tfidf_matrix(&texts)?.ncols();
            if vocab < dim {
                embed_tfidf_capped(corpus, vocab)
            } else {
                embed_tfidf(corpus, dim).map(|c| (c, dim))
            }
        }
        Err(e) => Err(e),
    }
}

/// Top-`k` right singular vectors of `a` as columns (vocab × k).
fn right_singular_basis(a: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let (n, v) = a.shape();
    let (values, mut basis) = if n < v {
        // Work in the smaller document space: A Aᵀ = U Σ² Uᵀ, V = Aᵀ U Σ⁻¹.
        let (values, u) = sorted_symmetric_eigen(a * a.transpose());
        let mut basis = a.transpose() * &u;
        for c in 0..basis.ncols() {
            let sigma = values[c].max(0.0).sqrt();
            if sigma > 0.0 {
                basis.column_mut(c).unscale_mut(sigma);
            }
        }
        (values, basis)
    } else {
        sorted_symmetric_eigen(a.transpose() * a)
    };

    let sigma_max = values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let rank = values
        .iter()
        .filter(|&&l| l.max(0.0).sqrt() > 1e-8 * sigma_max)
        .count();
    if k > rank {
        return Err(Error::RankTooLow { requested: k, rank });
    }
    basis = basis.columns(0, k).into_owned();
    canonical_signs(&mut basis);
    Ok(basis)
}
