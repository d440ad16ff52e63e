//! Column-major dense matrices and partial-pivoting LU.

use std::ops::{Index, IndexMut};

use crate::error::{DdpsError, Result};

/// Pivots smaller than this fraction of the matrix ∞-norm count as zero.
pub const PIVOT_RELATIVE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    /// Like [`DenseMatrix::zeros`] but reports allocation failure instead of
    /// aborting.
    pub fn try_zeros(n_rows: usize, n_cols: usize) -> Result<Self> {
        let len = n_rows
            .checked_mul(n_cols)
            .ok_or(DdpsError::OutOfMemory { bytes: usize::MAX })?;
        let mut values = Vec::new();
        values
            .try_reserve_exact(len)
            .map_err(|_| DdpsError::OutOfMemory {
                bytes: len.saturating_mul(std::mem::size_of::<f64>()),
            })?;
        values.resize(len, 0.0);
        Ok(DenseMatrix {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(DdpsError::DimensionMismatch {
                    expected: n_cols,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn row_major(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).map(|j| self[(i, j)]).collect())
            .collect()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Column-major storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.n_rows..(j + 1) * self.n_rows]
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.n_rows];
        for j in 0..self.n_cols {
            for (s, v) in sums.iter_mut().zip(self.column(j)) {
                *s += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn gemv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(DdpsError::DimensionMismatch {
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        self.gemv_acc(1.0, x, &mut y);
        Ok(y)
    }

    /// `y += alpha · G · x`, columns accumulated in index order.
    pub fn gemv_acc(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let s = alpha * xj;
            for (yi, gij) in y.iter_mut().zip(self.column(j)) {
                *yi += s * gij;
            }
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols != other.n_rows {
            return Err(DdpsError::DimensionMismatch {
                expected: self.n_cols,
                got: other.n_rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.n_rows, other.n_cols);
        for j in 0..other.n_cols {
            let mut col = vec![0.0; self.n_rows];
            self.gemv_acc(1.0, other.column(j), &mut col);
            out.column_mut(j).copy_from_slice(&col);
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        &self.values[j * self.n_rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        &mut self.values[j * self.n_rows + i]
    }
}

/// A zero (or negligible) pivot met during elimination of `column`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PivotFailure {
    pub column: usize,
}

/// `P·A = L·U` with unit lower-triangular `L`, stored packed in one matrix.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    /// Row `k` was swapped with row `swaps[k]` at step `k`.
    swaps: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &DenseMatrix) -> std::result::Result<Self, PivotFailure> {
        assert_eq!(a.n_rows, a.n_cols, "LU needs a square matrix");
        let n = a.n_rows;
        let threshold = PIVOT_RELATIVE_TOL * a.inf_norm();
        let mut lu = a.clone();
        let mut swaps = Vec::with_capacity(n);
        for k in 0..n {
            let col = lu.column(k);
            let (p, pivot) =
                col[k..]
                    .iter()
                    .enumerate()
                    .fold((k, 0.0_f64), |(bi, bv), (off, v)| {
                        if v.abs() > bv {
                            (k + off, v.abs())
                        } else {
                            (bi, bv)
                        }
                    });
            if pivot == 0.0 || pivot < threshold {
                return Err(PivotFailure { column: k });
            }
            swaps.push(p);
            if p != k {
                for j in 0..n {
                    lu.values.swap(j * n + k, j * n + p);
                }
            }
            let inv = 1.0 / lu[(k, k)];
            for v in &mut lu.column_mut(k)[k + 1..] {
                *v *= inv;
            }
            // rank-1 update of the trailing block, column by column
            let (left, right) = lu.values.split_at_mut((k + 1) * n);
            let lcol = &left[k * n + k + 1..k * n + n];
            for j in 0..n - k - 1 {
                let col = &mut right[j * n..(j + 1) * n];
                let ukj = col[k];
                if ukj != 0.0 {
                    for (x, l) in col[k + 1..].iter_mut().zip(lcol) {
                        *x -= l * ukj;
                    }
                }
            }
        }
        Ok(DenseLu { lu, swaps })
    }

    pub fn dim(&self) -> usize {
        self.lu.n_rows
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        for (k, &p) in self.swaps.iter().enumerate() {
            b.swap(k, p);
        }
        for j in 0..n {
            let bj = b[j];
            if bj != 0.0 {
                for (bi, l) in b[j + 1..].iter_mut().zip(&self.lu.column(j)[j + 1..]) {
                    *bi -= l * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = self.lu.column(j);
            b[j] /= col[j];
            let bj = b[j];
            if bj != 0.0 {
                for (bi, u) in b[..j].iter_mut().zip(&col[..j]) {
                    *bi -= u * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Unit lower-triangular factor.
    pub fn l(&self) -> DenseMatrix {
        let n = self.dim();
        let mut l = DenseMatrix::identity(n);
        for j in 0..n {
            for i in j + 1..n {
                l[(i, j)] = self.lu[(i, j)];
            }
        }
        l
    }

    pub fn u(&self) -> DenseMatrix {
        let n = self.dim();
        let mut u = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                u[(i, j)] = self.lu[(i, j)];
            }
        }
        u
    }

    /// `perm[k]` is the row of `A` that ends up in row `k` of `P·A`.
    pub fn row_permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.dim()).collect();
        for (k, &p) in self.swaps.iter().enumerate() {
            perm.swap(k, p);
        }
        perm
    }
}
