//! Hybrid direct/iterative solver for general sparse linear systems.
//!
//! The matrix is split along a block-row partition into its block diagonal
//! `D` and the remainder `R`. Each diagonal block is factorized exactly.
//! Columns of `R` with small ∞-norm are dropped (tolerance `δ`), and the
//! surviving columns of `G = D̃⁻¹ R̃` define a small reduced system that is
//! the only coupling between partitions. The resulting operator
//! `P = D̃ + R̃` preconditions an outer BiCGStab iteration.
//!
//! With `δ = 0` and a direct reduced solve, `P = A` and the method is a
//! direct solver; larger `δ` shrinks the reduced system and moves toward
//! block Jacobi.
//!
//! ```
//! use ddps::{ddps_solve, CsrMatrix, DdpsConfig};
//!
//! let a = CsrMatrix::from_dense_rows(&[
//!     vec![4.0, 1.0, 0.0, 0.0],
//!     vec![1.0, 4.0, 1.0, 0.0],
//!     vec![0.0, 1.0, 4.0, 1.0],
//!     vec![0.0, 0.0, 1.0, 4.0],
//! ])
//! .unwrap();
//! let f = a.spmv(&[1.0; 4]).unwrap();
//! let (x, report) = ddps_solve(&a, &f, &DdpsConfig::direct(2)).unwrap();
//! assert!(report.converged);
//! assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12));
//! ```

pub mod block;
pub mod dense;
pub mod error;
pub mod krylov;
pub mod matrix_market;
pub mod par;
pub mod partition;
pub mod reduced;
pub mod solver;
pub mod sparse;
pub mod vector;

pub use block::{BlockFactorization, BlockSplit};
pub use dense::{DenseLu, DenseMatrix};
pub use error::{DdpsError, Result};
pub use krylov::{bicgstab, FailureClass, KrylovConfig, SolveReport, StageTimings, Termination};
pub use matrix_market::{read_matrix_market, read_vector, write_matrix_market, write_vector};
pub use partition::{apply_permutation, symmetrize_pattern, Partition};
pub use reduced::{
    drop_columns, solve_reduced, DdpsPreconditioner, DropConfig, ReducedSetup, ReducedSolve,
};
pub use solver::{ddps_solve, DdpsConfig, DdpsSolver, PartitionStrategy, ReducedMode};
pub use sparse::CsrMatrix;
