//! The reduced coupling system.
//!
//! With `D̃⁻¹ A = I + G`, only the columns of `G` that are structurally
//! nonzero couple the partitions. Restricting `(I + G) z = g` to those
//! columns `c` yields a small closed system `Ĝ ẑ = ĝ`; once `ẑ` is known,
//! every other unknown follows from `z = g − G z`.

use crate::block::{BlockFactorization, BlockSplit};
use crate::dense::{DenseLu, DenseMatrix};
use crate::error::{DdpsError, Result};
use crate::krylov::{bicgstab, KrylovConfig, Preconditioner, Termination};
use crate::par;

/// Column drop tolerance `δ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropConfig {
    delta: f64,
}

impl DropConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&delta) {
            Ok(DropConfig { delta })
        } else {
            Err(DdpsError::InvalidConfig(format!(
                "drop tolerance {delta} outside [0, 1]"
            )))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `R̃`: in each block row `R_i`, columns with
/// `‖R_i(:, k)‖∞ ≤ δ · max_j ‖R_i(:, j)‖∞` are removed.
pub fn drop_columns(split: &BlockSplit, cfg: DropConfig) -> crate::sparse::CsrMatrix {
    let r = split.remainder();
    let n = r.n_rows();
    let bounds = split.boundaries();
    let kept_rows = par::map_indexed(split.parts(), |i| {
        let rows = bounds[i]..bounds[i + 1];
        let mut col_norm: Vec<(usize, f64)> = Vec::new();
        for row in rows.clone() {
            let (cols, vals) = r.row(row);
            col_norm.extend(cols.iter().zip(vals).map(|(&j, &v)| (j, v.abs())));
        }
        col_norm.sort_by_key(|&(j, _)| j);
        col_norm.dedup_by(|later, first| {
            if later.0 == first.0 {
                first.1 = first.1.max(later.1);
                true
            } else {
                false
            }
        });
        let max = col_norm.iter().fold(0.0_f64, |m, &(_, v)| m.max(v));
        let cut = cfg.delta * max;
        let keep = |j: usize| {
            col_norm
                .binary_search_by_key(&j, |&(c, _)| c)
                .map(|k| col_norm[k].1 > cut)
                .unwrap_or(false)
        };
        rows.map(|row| {
            let (cols, vals) = r.row(row);
            cols.iter()
                .zip(vals)
                .filter(|(&j, _)| keep(j))
                .map(|(&j, &v)| (j, v))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
    });
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for row in kept_rows.into_iter().flatten() {
        for (j, v) in row {
            col_idx.push(j);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    crate::sparse::CsrMatrix::try_from_csr(n, r.n_cols(), row_ptr, col_idx, values)
        .expect("subset of a canonical matrix")
}

/// Dense per-partition columns of `G = D̃⁻¹ R̃` plus the assembled `Ĝ`.
#[derive(Debug, Clone)]
pub struct ReducedSetup {
    boundaries: Vec<usize>,
    columns: Vec<usize>,
    g_blocks: Vec<DenseMatrix>,
    ghat: DenseMatrix,
}

impl ReducedSetup {
    /// Computes `G(:, c)` for `c` = the structurally nonzero columns of
    /// `rtilde`, one triangular solve pair per (partition, column) touching
    /// that partition. `D̃⁻¹` is never formed.
    pub fn compute(
        factors: &BlockFactorization,
        rtilde: &crate::sparse::CsrMatrix,
    ) -> Result<Self> {
        let n = factors.n();
        if rtilde.n_rows() != n || rtilde.n_cols() != n {
            return Err(DdpsError::DimensionMismatch {
                expected: n,
                got: rtilde.n_rows(),
            });
        }
        let mut present = vec![false; n];
        for &j in rtilde.col_idx() {
            present[j] = true;
        }
        let columns: Vec<usize> = (0..n).filter(|&j| present[j]).collect();
        let mut position = vec![usize::MAX; n];
        for (k, &j) in columns.iter().enumerate() {
            position[j] = k;
        }

        let bounds = factors.boundaries();
        let blocks = par::map_indexed(factors.parts(), |i| -> Result<DenseMatrix> {
            let rows = bounds[i]..bounds[i + 1];
            let m = rows.len();
            let mut g = DenseMatrix::try_zeros(m, columns.len())?;
            let mut touched = vec![false; columns.len()];
            for row in rows.clone() {
                let (cols, vals) = rtilde.row(row);
                for (&j, &v) in cols.iter().zip(vals) {
                    let k = position[j];
                    g[(row - rows.start, k)] = v;
                    touched[k] = true;
                }
            }
            let lu = factors.block(i);
            if m > 0 {
                par::for_each_chunk_mut(g.values_mut(), m, |start, col| {
                    if touched[start / m] {
                        lu.solve_in_place(col);
                    }
                });
            }
            Ok(g)
        });
        let g_blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;

        let mut setup = ReducedSetup {
            boundaries: bounds.to_vec(),
            columns,
            g_blocks,
            ghat: DenseMatrix::zeros(0, 0),
        };
        setup.ghat = setup.assemble_ghat()?;
        Ok(setup)
    }

    /// Global indices `c` of the retained columns, increasing.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn size(&self) -> usize {
        self.columns.len()
    }

    /// `G(rows of partition i, c)`.
    pub fn g_block(&self, i: usize) -> &DenseMatrix {
        &self.g_blocks[i]
    }

    /// `G(row, c[k])` for a global row.
    pub fn g_entry(&self, row: usize, k: usize) -> f64 {
        let part = self.boundaries.partition_point(|&b| b <= row) - 1;
        self.g_blocks[part][(row - self.boundaries[part], k)]
    }

    pub fn ghat(&self) -> &DenseMatrix {
        &self.ghat
    }

    /// `Ĝ = I(c, c) + G(c, c)`.
    pub fn assemble_ghat(&self) -> Result<DenseMatrix> {
        let k = self.columns.len();
        let mut ghat = DenseMatrix::try_zeros(k, k)?;
        for (a, &row) in self.columns.iter().enumerate() {
            for b in 0..k {
                ghat[(a, b)] = self.g_entry(row, b);
            }
            ghat[(a, a)] += 1.0;
        }
        Ok(ghat)
    }

    /// `z = g − G(:, c) · zhat`, partition by partition.
    pub fn retrieve(&self, g: &[f64], zhat: &[f64], z: &mut [f64]) {
        z.copy_from_slice(g);
        if self.columns.is_empty() {
            return;
        }
        par::for_each_segment_mut(z, &self.boundaries, |i, piece| {
            self.g_blocks[i].gemv_acc(-1.0, zhat, piece)
        });
    }
}

/// How to solve `Ĝ ẑ = ĝ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReducedSolve {
    Direct,
    /// Unpreconditioned BiCGStab from zero.
    Iterative {
        eps_in: f64,
        max_inner: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    pub zhat: Vec<f64>,
    /// Zero for a direct solve; half-steps allowed.
    pub iterations: f64,
    /// False when the inner iteration stopped without meeting `eps_in`.
    pub converged: bool,
}

/// One-shot reduced solve. The direct path factorizes `Ĝ` on every call; the
/// preconditioner keeps its own factorization instead.
pub fn solve_reduced(
    setup: &ReducedSetup,
    ghat_rhs: &[f64],
    method: ReducedSolve,
) -> Result<ReducedSolution> {
    if ghat_rhs.len() != setup.size() {
        return Err(DdpsError::DimensionMismatch {
            expected: setup.size(),
            got: ghat_rhs.len(),
        });
    }
    let solver = ReducedSolver::new(setup, method)?;
    Ok(solver.solve(&setup.ghat, ghat_rhs))
}

#[derive(Debug, Clone)]
enum ReducedSolver {
    Empty,
    Direct(DenseLu),
    Iterative(KrylovConfig),
}

impl ReducedSolver {
    fn new(setup: &ReducedSetup, method: ReducedSolve) -> Result<Self> {
        if setup.size() == 0 {
            return Ok(ReducedSolver::Empty);
        }
        match method {
            ReducedSolve::Direct => DenseLu::factor(&setup.ghat)
                .map(ReducedSolver::Direct)
                .map_err(|_| DdpsError::ReducedSingular),
            ReducedSolve::Iterative { eps_in, max_inner } => {
                if !(eps_in > 0.0) || max_inner == 0 {
                    return Err(DdpsError::InvalidConfig(
                        "inner tolerance must be positive and the inner cap at least 1".into(),
                    ));
                }
                Ok(ReducedSolver::Iterative(KrylovConfig {
                    eps: eps_in,
                    max_iter: max_inner,
                }))
            }
        }
    }

    fn solve(&self, ghat: &DenseMatrix, rhs: &[f64]) -> ReducedSolution {
        match self {
            ReducedSolver::Empty => ReducedSolution {
                zhat: Vec::new(),
                iterations: 0.0,
                converged: true,
            },
            ReducedSolver::Direct(lu) => ReducedSolution {
                zhat: lu.solve(rhs),
                iterations: 0.0,
                converged: true,
            },
            ReducedSolver::Iterative(cfg) => {
                let (zhat, rep) = bicgstab(ghat, None, rhs, cfg);
                ReducedSolution {
                    zhat,
                    iterations: rep.outer_iterations,
                    converged: rep.termination == Termination::Converged,
                }
            }
        }
    }
}

/// `P = D̃ + R̃` applied through its factorized form.
#[derive(Debug, Clone)]
pub struct DdpsPreconditioner {
    factors: BlockFactorization,
    setup: ReducedSetup,
    solver: ReducedSolver,
}

impl DdpsPreconditioner {
    pub fn new(
        factors: BlockFactorization,
        setup: ReducedSetup,
        method: ReducedSolve,
    ) -> Result<Self> {
        let solver = ReducedSolver::new(&setup, method)?;
        Ok(DdpsPreconditioner {
            factors,
            setup,
            solver,
        })
    }

    pub fn factors(&self) -> &BlockFactorization {
        &self.factors
    }

    pub fn setup(&self) -> &ReducedSetup {
        &self.setup
    }

    pub fn is_direct(&self) -> bool {
        !matches!(self.solver, ReducedSolver::Iterative(_))
    }

    /// Solves `P z = y`: `g = D̃⁻¹ y`, `ĝ = g(c)`, `Ĝ ẑ = ĝ`, `z = g − G(:, c) ẑ`.
    /// An inner solve that misses its tolerance still returns its iterate.
    pub fn apply_detailed(&self, y: &[f64], z: &mut [f64]) -> ReducedSolution {
        let mut g = y.to_vec();
        self.factors.solve_blocks_in_place(&mut g);
        let ghat_rhs: Vec<f64> = self.setup.columns.iter().map(|&j| g[j]).collect();
        let sol = self.solver.solve(&self.setup.ghat, &ghat_rhs);
        self.setup.retrieve(&g, &sol.zhat, z);
        sol
    }

    pub fn apply_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.factors.n() {
            return Err(DdpsError::DimensionMismatch {
                expected: self.factors.n(),
                got: y.len(),
            });
        }
        let mut z = vec![0.0; y.len()];
        self.apply_detailed(y, &mut z);
        Ok(z)
    }
}

impl Preconditioner for DdpsPreconditioner {
    fn apply(&self, y: &[f64], z: &mut [f64]) -> f64 {
        self.apply_detailed(y, z).iterations
    }
}
