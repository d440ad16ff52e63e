//! Compressed sparse row storage.

use std::ops::Range;

use crate::dense::DenseMatrix;
use crate::error::{DdpsError, Result};
use crate::par;

/// Real sparse matrix in canonical CSR form: columns strictly increasing
/// within each row and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays. Rows may be unsorted and may hold
    /// duplicates (summed) or explicit zeros (dropped).
    pub fn try_from_csr(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(DdpsError::DimensionMismatch {
                expected: n_rows + 1,
                got: row_ptr.len(),
            });
        }
        if col_idx.len() != values.len() {
            return Err(DdpsError::DimensionMismatch {
                expected: col_idx.len(),
                got: values.len(),
            });
        }
        if row_ptr[0] != 0
            || row_ptr[n_rows] != col_idx.len()
            || row_ptr.windows(2).any(|w| w[0] > w[1])
        {
            return Err(DdpsError::InvalidConfig("malformed row pointer".into()));
        }
        if let Some(&j) = col_idx.iter().find(|&&j| j >= n_cols) {
            return Err(DdpsError::DimensionMismatch {
                expected: n_cols,
                got: j + 1,
            });
        }
        let raw = CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        };
        Ok(raw.canonicalize())
    }

    /// Builds a matrix from `(row, col, value)` entries, summing duplicates.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(i, j, _) in entries {
            if i >= n_rows {
                return Err(DdpsError::DimensionMismatch {
                    expected: n_rows,
                    got: i + 1,
                });
            }
            if j >= n_cols {
                return Err(DdpsError::DimensionMismatch {
                    expected: n_cols,
                    got: j + 1,
                });
            }
            counts[i + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; entries.len()];
        let mut values = vec![0.0; entries.len()];
        for &(i, j, v) in entries {
            col_idx[next[i]] = j;
            values[next[i]] = v;
            next[i] += 1;
        }
        Self::try_from_csr(n_rows, n_cols, row_ptr, col_idx, values)
    }

    /// Dense row-major input, zeros skipped.
    pub fn from_dense_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(DdpsError::DimensionMismatch {
                    expected: n_cols,
                    got: row.len(),
                });
            }
            entries.extend(
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, &v)| (i, j, v)),
            );
        }
        Self::from_triplets(rows.len(), n_cols, &entries)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let entries: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(diag.len(), diag.len(), &entries).expect("diagonal indices in range")
    }

    /// Sorts each row, sums duplicate columns and removes zeros.
    pub fn canonicalize(self) -> Self {
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..self.n_rows {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            scratch.clear();
            scratch.extend(
                self.col_idx[range.clone()]
                    .iter()
                    .copied()
                    .zip(self.values[range].iter().copied()),
            );
            // stable sort keeps duplicates in input order so the sum is reproducible
            scratch.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < scratch.len() {
                let j = scratch[k].0;
                let mut sum = scratch[k].1;
                k += 1;
                while k < scratch.len() && scratch[k].0 == j {
                    sum += scratch[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    col_idx.push(j);
                    values.push(sum);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub(crate) fn ensure_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(DdpsError::NotSquare {
                rows: self.n_rows,
                cols: self.n_cols,
            })
        }
    }

    /// `A · x`. Each output entry is summed left to right over its row, so
    /// the result does not depend on how rows are distributed over workers.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(DdpsError::DimensionMismatch {
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A · x` without dimension checks beyond debug assertions.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        par::for_each_chunk_mut(y, par::ROW_CHUNK, |start, chunk| {
            for (k, yi) in chunk.iter_mut().enumerate() {
                let (cols, vals) = self.row(start + k);
                *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
            }
        });
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, j, v) in self.triplets() {
            col_idx[next[j]] = i;
            values[next[j]] = v;
            next[j] += 1;
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Copy of `A(rows, cols)` with indices shifted to start at zero.
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> CsrMatrix {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in rows.clone() {
            let (c, v) = self.row(i);
            let lo = c.partition_point(|&j| j < cols.start);
            let hi = c.partition_point(|&j| j < cols.end);
            col_idx.extend(c[lo..hi].iter().map(|&j| j - cols.start));
            values.extend_from_slice(&v[lo..hi]);
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n_rows: rows.len(),
            n_cols: cols.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Fraction of rows with `|a_ii| ≥ Σ_{j≠i} |a_ij|`. Reporting only.
    pub fn diag_dominance(&self) -> Result<f64> {
        self.ensure_square()?;
        if self.n_rows == 0 {
            return Ok(1.0);
        }
        let dominant = (0..self.n_rows)
            .filter(|&i| {
                let (cols, vals) = self.row(i);
                let mut diag = 0.0;
                let mut off = 0.0;
                for (&j, &v) in cols.iter().zip(vals) {
                    if j == i {
                        diag = v.abs();
                    } else {
                        off += v.abs();
                    }
                }
                diag >= off
            })
            .count();
        Ok(dominant as f64 / self.n_rows as f64)
    }
}
