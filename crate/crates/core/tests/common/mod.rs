//! Shared fixtures and independent oracles for the integration tests.
//!
//! The dense routines here deliberately avoid the crate's own kernels so
//! they can serve as an independent reference.
#![allow(dead_code)]

use std::path::PathBuf;

use ddps::CsrMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// The 9x9 worked example, row-major.
pub fn worked_example_dense() -> Vec<Vec<f64>> {
    vec![
        vec![0.2, 1.0, -1.0, 0.0, 0.01, 0.0, 0.0, 0.0, -0.01],
        vec![0.01, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![-0.1, 0.0, 0.4, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.3, 0.6, 2.0, 0.0, 0.0, 0.0],
        vec![0.0, -0.2, 0.0, 0.0, 0.4, 0.0, 0.0, 0.0, 1.1],
        vec![0.0, 0.0, 0.0, -0.2, 0.1, 0.5, 0.0, 0.0, 0.0],
        vec![1.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.4, 0.02, 3.0],
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.5, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.6],
    ]
}

pub fn worked_example() -> CsrMatrix {
    CsrMatrix::from_dense_rows(&worked_example_dense()).unwrap()
}

/// Right-hand side printed after premultiplying by the block-diagonal inverse.
pub const WORKED_G_RHS: [f64; 9] = [
    -2.0, 3.4, 2.0, -3.1818, 2.5, 0.2273, -1.3103, 7.2414, 0.4598,
];
/// Reduced solution for unknowns 1, 2, 5, 9.
pub const WORKED_REDUCED: [f64; 4] = [-3.2389, 3.4413, -0.1151, 1.5766];
/// Final solution.
pub const WORKED_X: [f64; 9] = [
    -3.2389, 3.4413, 1.7766, -2.7063, -0.1151, 0.9405, 0.365, 0.5402, 1.5766,
];

pub fn dense_of(a: &CsrMatrix) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; a.n_cols()]; a.n_rows()];
    for (i, j, v) in a.triplets() {
        d[i][j] = v;
    }
    d
}

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting on a row-major copy.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap())
            .unwrap();
        m.swap(k, p);
        assert!(m[k][k] != 0.0, "oracle met a singular matrix");
        for i in k + 1..n {
            let factor = m[i][k] / m[k][k];
            if factor != 0.0 {
                for j in k..=n {
                    m[i][j] -= factor * m[k][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Random sparse square matrix with about `per_row` off-diagonal entries per
/// row drawn from U(-1, 1), diagonal set to `±(shift · Σ|offdiag| + 1)`
/// with a random sign.
pub fn random_sparse(n: usize, per_row: usize, shift: f64, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        let mut off = 0.0;
        for _ in 0..per_row {
            let j = rng.gen_range(0..n);
            if j != i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                off += v.abs();
                entries.push((i, j, v));
            }
        }
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        entries.push((i, i, sign * (shift * off + 1.0)));
    }
    CsrMatrix::from_triplets(n, n, &entries).unwrap()
}

/// Dense random matrix with entries U(-1, 1) plus `diag` on the diagonal.
pub fn random_dense(n: usize, diag: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| rng.gen_range(-1.0..1.0) + if i == j { diag } else { 0.0 })
                .collect()
        })
        .collect()
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Dense `G = D⁻¹ R` for contiguous `bounds`, column by column through the
/// oracle solver.
pub fn dense_g(a: &[Vec<f64>], rtilde: &[Vec<f64>], bounds: &[usize]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut g = vec![vec![0.0; n]; n];
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let block: Vec<Vec<f64>> = (lo..hi).map(|i| a[i][lo..hi].to_vec()).collect();
        for j in 0..n {
            let rhs: Vec<f64> = (lo..hi).map(|i| rtilde[i][j]).collect();
            if rhs.iter().any(|&v| v != 0.0) {
                let col = dense_solve(&block, &rhs);
                for (k, v) in col.into_iter().enumerate() {
                    g[lo + k][j] = v;
                }
            }
        }
    }
    g
}
