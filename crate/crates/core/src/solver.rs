//! End-to-end pipeline: reorder, split, factorize, drop, build the reduced
//! system, then run the preconditioned outer iteration.

use std::time::Instant;

use crate::block::{BlockFactorization, BlockSplit};
use crate::error::{DdpsError, Result};
use crate::krylov::{bicgstab, FailureClass, KrylovConfig, SolveReport, StageTimings};
use crate::partition::{permute_symmetric, symmetrize_pattern, Partition};
use crate::reduced::{drop_columns, DdpsPreconditioner, DropConfig, ReducedSetup, ReducedSolve};
use crate::sparse::CsrMatrix;
use crate::vector::relative_residual;

/// Reduced systems up to this size are solved by dense LU in `Auto` mode.
pub const DEFAULT_DIRECT_THRESHOLD: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub enum PartitionStrategy {
    /// Consecutive near-equal row blocks, no reordering.
    Contiguous,
    /// Recursive level-set bisection of `(|A| + |Aᵀ|) / 2`.
    Bisection,
    /// A precomputed partition (for instance from a METIS part vector).
    Given(Partition),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedMode {
    /// Direct when `|c| ≤ direct_threshold`, iterative otherwise.
    Auto,
    Direct,
    Iterative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdpsConfig {
    pub partitions: usize,
    pub partitioner: PartitionStrategy,
    pub delta: f64,
    pub eps_out: f64,
    pub eps_in: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub reduced: ReducedMode,
    pub direct_threshold: usize,
    /// Relative diagonal shift for blocks that fail to factorize.
    pub perturb: Option<f64>,
}

impl Default for DdpsConfig {
    fn default() -> Self {
        DdpsConfig {
            partitions: 4,
            partitioner: PartitionStrategy::Contiguous,
            delta: 0.9,
            eps_out: 1e-5,
            eps_in: 1e-4,
            max_outer: 1000,
            max_inner: 100,
            reduced: ReducedMode::Auto,
            direct_threshold: DEFAULT_DIRECT_THRESHOLD,
            perturb: None,
        }
    }
}

impl DdpsConfig {
    /// No dropping, exact block LU, direct reduced solve.
    pub fn direct(partitions: usize) -> Self {
        DdpsConfig {
            partitions,
            delta: 0.0,
            reduced: ReducedMode::Direct,
            ..DdpsConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_out > 0.0) || !(self.eps_in > 0.0) {
            return Err(DdpsError::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(DdpsError::InvalidConfig(
                "iteration caps must be at least 1".into(),
            ));
        }
        if let Some(p) = self.perturb {
            if !(p > 0.0) || !p.is_finite() {
                return Err(DdpsError::InvalidConfig(
                    "perturbation must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Right-hand-side independent setup (stages 1 to 5).
#[derive(Debug)]
pub struct DdpsSolver {
    original: CsrMatrix,
    permuted: CsrMatrix,
    partition: Partition,
    preconditioner: DdpsPreconditioner,
    config: DdpsConfig,
    timings: StageTimings,
}

impl DdpsSolver {
    pub fn setup(a: &CsrMatrix, config: &DdpsConfig) -> Result<Self> {
        config.validate()?;
        a.ensure_square()?;
        let drop = DropConfig::new(config.delta)?;
        let n = a.n_rows();
        let mut timings = StageTimings::default();

        let clock = Instant::now();
        let partition = match &config.partitioner {
            PartitionStrategy::Contiguous => Partition::contiguous(n, config.partitions)?,
            PartitionStrategy::Bisection => {
                Partition::bisection(&symmetrize_pattern(a)?, config.partitions)?
            }
            PartitionStrategy::Given(p) => {
                if p.n() != n {
                    return Err(DdpsError::DimensionMismatch {
                        expected: n,
                        got: p.n(),
                    });
                }
                p.clone()
            }
        };
        let permuted = match (partition.perm(), partition.inv_perm()) {
            (Some(perm), Some(inv)) => permute_symmetric(a, perm, inv),
            _ => a.clone(),
        };
        timings.reorder = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let split = BlockSplit::new(&permuted, &partition)?;
        timings.split = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let factors = BlockFactorization::factorize(&split, config.perturb)?;
        timings.factorize = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let rtilde = drop_columns(&split, drop);
        let setup = ReducedSetup::compute(&factors, &rtilde)?;
        let method = match config.reduced {
            ReducedMode::Direct => ReducedSolve::Direct,
            ReducedMode::Auto if setup.size() <= config.direct_threshold => ReducedSolve::Direct,
            ReducedMode::Auto | ReducedMode::Iterative => ReducedSolve::Iterative {
                eps_in: config.eps_in,
                max_inner: config.max_inner,
            },
        };
        let preconditioner = DdpsPreconditioner::new(factors, setup, method)?;
        timings.compute_g = clock.elapsed().as_secs_f64();

        Ok(DdpsSolver {
            original: a.clone(),
            permuted,
            partition,
            preconditioner,
            config: config.clone(),
            timings,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn preconditioner(&self) -> &DdpsPreconditioner {
        &self.preconditioner
    }

    /// `|c|`.
    pub fn reduced_size(&self) -> usize {
        self.preconditioner.setup().size()
    }

    /// System matrix in partition order.
    pub fn permuted_matrix(&self) -> &CsrMatrix {
        &self.permuted
    }

    pub fn setup_timings(&self) -> StageTimings {
        self.timings
    }

    /// Outer BiCGStab on the reordered system; the returned solution is in
    /// the original ordering and `final_relres` is measured against the
    /// original `A` and `f`.
    pub fn solve(&self, f: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        if f.len() != self.original.n_rows() {
            return Err(DdpsError::DimensionMismatch {
                expected: self.original.n_rows(),
                got: f.len(),
            });
        }
        let pf: Vec<f64> = match self.partition.perm() {
            Some(perm) => perm.iter().map(|&row| f[row]).collect(),
            None => f.to_vec(),
        };
        let clock = Instant::now();
        let cfg = KrylovConfig {
            eps: self.config.eps_out,
            max_iter: self.config.max_outer,
        };
        let (px, mut report) = bicgstab(&self.permuted, Some(&self.preconditioner), &pf, &cfg);
        let x = self.partition.unpermute(&px);
        let ax = self.original.spmv(&x)?;
        report.final_relres = relative_residual(f, &ax);
        report.converged = report.final_relres <= self.config.eps_out;
        report.failure = (!report.converged).then_some(FailureClass::F2);
        report.reduced_size = self.reduced_size();
        report.timings = StageTimings {
            solve: clock.elapsed().as_secs_f64(),
            ..self.timings
        };
        Ok((x, report))
    }
}

/// Setup followed by a single solve.
pub fn ddps_solve(
    a: &CsrMatrix,
    f: &[f64],
    config: &DdpsConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    if f.len() != a.n_rows() {
        return Err(DdpsError::DimensionMismatch {
            expected: a.n_rows(),
            got: f.len(),
        });
    }
    DdpsSolver::setup(a, config)?.solve(f)
}
