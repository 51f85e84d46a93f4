use ndarray::{Array2, ArrayView2};

/// Per-axis min-max map onto `[-1, 1]`. A constant axis maps to 0.
///
/// Display only: losses never see normalized coordinates.
pub fn normalize_viewport(raw: ArrayView2<f64>) -> Array2<f64> {
    let mut out = raw.to_owned();
    for mut col in out.columns_mut() {
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        if span > 0.0 && span.is_finite() {
            col.mapv_inplace(|v| ((2.0 * (v - lo) / span) - 1.0).clamp(-1.0, 1.0));
        } else {
            col.fill(0.0);
        }
    }
    out
}
