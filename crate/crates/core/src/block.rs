//! Splitting `A = D + R` along a block-row partition and factorizing the
//! diagonal blocks of `D`.

use crate::dense::DenseLu;
use crate::error::{DdpsError, Result};
use crate::par;
use crate::partition::Partition;
use crate::sparse::CsrMatrix;

/// Diagonal blocks `A_ii` and the off-block remainder `R = A - D`.
#[derive(Debug, Clone)]
pub struct BlockSplit {
    boundaries: Vec<usize>,
    blocks: Vec<CsrMatrix>,
    remainder: CsrMatrix,
}

impl BlockSplit {
    /// Splits `a` using the partition's block boundaries. `a` must already be
    /// in the partition's ordering (see [`crate::partition::apply_permutation`]).
    pub fn new(a: &CsrMatrix, part: &Partition) -> Result<Self> {
        a.ensure_square()?;
        if a.n_rows() != part.n() {
            return Err(DdpsError::DimensionMismatch {
                expected: part.n(),
                got: a.n_rows(),
            });
        }
        let blocks = (0..part.parts())
            .map(|i| a.submatrix(part.range(i), part.range(i)))
            .collect();
        let mut row_ptr = Vec::with_capacity(a.n_rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..part.parts() {
            let own = part.range(i);
            for row in own.clone() {
                let (cols, vals) = a.row(row);
                for (&j, &v) in cols.iter().zip(vals) {
                    if !own.contains(&j) {
                        col_idx.push(j);
                        values.push(v);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        let remainder = CsrMatrix::try_from_csr(a.n_rows(), a.n_cols(), row_ptr, col_idx, values)?;
        Ok(BlockSplit {
            boundaries: part.boundaries().to_vec(),
            blocks,
            remainder,
        })
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn parts(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[CsrMatrix] {
        &self.blocks
    }

    /// `R`: every entry of `A` outside the diagonal blocks.
    pub fn remainder(&self) -> &CsrMatrix {
        &self.remainder
    }

    /// `D + R`.
    pub fn reassemble(&self) -> CsrMatrix {
        let n = self.remainder.n_rows();
        let mut entries: Vec<_> = self.remainder.triplets().collect();
        for (block, w) in self.blocks.iter().zip(self.boundaries.windows(2)) {
            entries.extend(block.triplets().map(|(i, j, v)| (i + w[0], j + w[0], v)));
        }
        CsrMatrix::from_triplets(n, n, &entries).expect("block indices stay in range")
    }
}

/// Exact LU factors of every diagonal block.
#[derive(Debug, Clone)]
pub struct BlockFactorization {
    boundaries: Vec<usize>,
    factors: Vec<DenseLu>,
    perturbed: Vec<usize>,
}

impl BlockFactorization {
    /// Dense LU with partial pivoting on each block, blocks in parallel.
    ///
    /// On a negligible pivot, `perturb = Some(eps)` shifts the block diagonal
    /// by `eps · ‖A_ii‖∞` and refactorizes once; otherwise the block is
    /// reported as singular.
    pub fn factorize(split: &BlockSplit, perturb: Option<f64>) -> Result<Self> {
        let results = par::map_indexed(split.parts(), |i| factor_block(&split.blocks[i], perturb));
        let mut factors = Vec::with_capacity(results.len());
        let mut perturbed = Vec::new();
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Some((lu, shifted)) => {
                    if shifted {
                        perturbed.push(i);
                    }
                    factors.push(lu);
                }
                None => return Err(DdpsError::SingularBlock(i)),
            }
        }
        Ok(BlockFactorization {
            boundaries: split.boundaries.clone(),
            factors,
            perturbed,
        })
    }

    pub fn n(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    pub fn parts(&self) -> usize {
        self.factors.len()
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn block(&self, i: usize) -> &DenseLu {
        &self.factors[i]
    }

    /// Blocks that needed a diagonal shift to factorize.
    pub fn perturbed_blocks(&self) -> &[usize] {
        &self.perturbed
    }

    /// `D̃⁻¹ y`, block by block.
    pub fn solve_blocks(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n() {
            return Err(DdpsError::DimensionMismatch {
                expected: self.n(),
                got: y.len(),
            });
        }
        let mut g = y.to_vec();
        self.solve_blocks_in_place(&mut g);
        Ok(g)
    }

    pub fn solve_blocks_in_place(&self, y: &mut [f64]) {
        debug_assert_eq!(y.len(), self.n());
        par::for_each_segment_mut(y, &self.boundaries, |i, piece| {
            self.factors[i].solve_in_place(piece)
        });
    }
}

fn factor_block(block: &CsrMatrix, perturb: Option<f64>) -> Option<(DenseLu, bool)> {
    let dense = block.to_dense();
    match DenseLu::factor(&dense) {
        Ok(lu) => Some((lu, false)),
        Err(_) => {
            let eps = perturb?;
            let shift = eps * dense.inf_norm();
            let mut shifted = dense;
            for k in 0..shifted.n_rows() {
                shifted[(k, k)] += shift;
            }
            DenseLu::factor(&shifted).ok().map(|lu| (lu, true))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_part_has_empty_remainder() {
        let a = CsrMatrix::from_dense_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let split = BlockSplit::new(&a, &Partition::contiguous(2, 1).unwrap()).unwrap();
        assert_eq!(split.blocks()[0], a);
        assert_eq!(split.remainder().nnz(), 0);
    }

    #[test]
    fn block_diagonal_matrix_has_empty_remainder() {
        let a = CsrMatrix::from_dense_rows(&[
            vec![1.0, 2.0, 0.0, 0.0],
            vec![3.0, 4.0, 0.0, 0.0],
            vec![0.0, 0.0, 5.0, 6.0],
            vec![0.0, 0.0, 7.0, 8.0],
        ])
        .unwrap();
        let split = BlockSplit::new(&a, &Partition::contiguous(4, 2).unwrap()).unwrap();
        assert_eq!(split.remainder().nnz(), 0);
        assert_eq!(split.reassemble(), a);
    }

    #[test]
    fn split_rejects_wrong_partition_size() {
        let a = CsrMatrix::identity(3);
        assert!(matches!(
            BlockSplit::new(&a, &Partition::contiguous(4, 2).unwrap()),
            Err(DdpsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_blocks_leave_rhs_unchanged() {
        let a = CsrMatrix::identity(5);
        let split = BlockSplit::new(&a, &Partition::contiguous(5, 2).unwrap()).unwrap();
        let f = BlockFactorization::factorize(&split, None).unwrap();
        let y = vec![1.0, -2.0, 3.0, 0.5, 9.0];
        assert_eq!(f.solve_blocks(&y).unwrap(), y);
    }

    #[test]
    fn singular_block_without_perturbation_fails() {
        let a = CsrMatrix::from_dense_rows(&[
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0, 1.0],
        ])
        .unwrap();
        let split = BlockSplit::new(&a, &Partition::contiguous(4, 2).unwrap()).unwrap();
        assert!(matches!(
            BlockFactorization::factorize(&split, None),
            Err(DdpsError::SingularBlock(1))
        ));
        let f = BlockFactorization::factorize(&split, Some(1e-8)).unwrap();
        assert_eq!(f.perturbed_blocks(), &[1]);
    }

    #[test]
    fn zero_block_stays_singular_under_perturbation() {
        let a = CsrMatrix::from_dense_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let split = BlockSplit::new(&a, &Partition::contiguous(2, 2).unwrap()).unwrap();
        assert!(matches!(
            BlockFactorization::factorize(&split, Some(1e-3)),
            Err(DdpsError::SingularBlock(0))
        ));
    }
}
