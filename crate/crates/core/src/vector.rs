//! Dense vector kernels on `[f64]` slices.

use crate::par;

/// `max |x_i|`, zero for an empty slice.
pub fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Inner product with a fixed summation order (see [`par::chunked_sum`]).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    par::chunked_sum(a.len(), |lo, hi| {
        a[lo..hi].iter().zip(&b[lo..hi]).map(|(x, y)| x * y).sum()
    })
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `a - b`
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `‖f − y‖∞ / ‖f‖∞`, with the convention `0/0 = 0`.
pub fn relative_residual(f: &[f64], y: &[f64]) -> f64 {
    let fnorm = inf_norm(f);
    let rnorm = f
        .iter()
        .zip(y)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if fnorm == 0.0 {
        rnorm
    } else {
        rnorm / fnorm
    }
}

pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}
