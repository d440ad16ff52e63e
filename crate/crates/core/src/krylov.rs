//! Right-preconditioned BiCGStab.
//!
//! The residual is tested after both half-steps of every iteration, so a
//! solve that finishes at the intermediate `s` update reports a count ending
//! in `.5`. Whenever the recursively updated residual passes the test, the
//! true residual `f − A x` is recomputed; if it fails, it replaces the
//! recursive one and the iteration continues.

use serde::Serialize;

use crate::dense::DenseMatrix;
use crate::sparse::CsrMatrix;
use crate::vector::{axpy, dot, inf_norm};

/// `|ρ|`, `|r̂·v|` and `|ω|` below this stop the iteration.
pub const BREAKDOWN_TOL: f64 = 1e-300;

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = Op · x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        self.gemv_acc(1.0, x, y)
    }
}

/// Approximate solve `z ≈ P⁻¹ y`.
pub trait Preconditioner: Sync {
    /// Writes `z` and returns the number of inner iterations spent (zero for
    /// a direct application).
    fn apply(&self, y: &[f64], z: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    /// Relative residual tolerance, ∞-norm.
    pub eps: f64,
    /// Cap on full iterations.
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FailureClass {
    /// Ran out of memory.
    F1,
    /// Final relative residual above the tolerance.
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    Breakdown,
}

/// Wall-clock seconds per solver stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub reorder: f64,
    pub split: f64,
    pub factorize: f64,
    pub compute_g: f64,
    pub solve: f64,
}

impl StageTimings {
    pub fn setup(&self) -> f64 {
        self.reorder + self.split + self.factorize + self.compute_g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub failure: Option<FailureClass>,
    pub termination: Termination,
    /// Multiple of 0.5.
    pub outer_iterations: f64,
    /// Mean inner iterations per preconditioner application.
    pub inner_iterations_avg: f64,
    pub preconditioner_applications: usize,
    /// Fresh `‖f − A x‖∞ / ‖f‖∞` for the returned iterate.
    pub final_relres: f64,
    /// Recursive residual estimate after each half-step, starting with 1.
    pub residual_history: Vec<f64>,
    pub reduced_size: usize,
    pub timings: StageTimings,
}

fn true_residual(op: &dyn LinearOperator, f: &[f64], x: &[f64], r: &mut [f64]) {
    op.apply(x, r);
    for (ri, fi) in r.iter_mut().zip(f) {
        *ri = fi - *ri;
    }
}

fn precondition(
    m: Option<&dyn Preconditioner>,
    y: &[f64],
    z: &mut [f64],
    inner: &mut f64,
    count: &mut usize,
) {
    match m {
        Some(m) => {
            *inner += m.apply(y, z);
            *count += 1;
        }
        None => z.copy_from_slice(y),
    }
}

/// Solves `A x = f` from `x = 0` with optional right preconditioning.
///
/// On non-convergence the iterate with the smallest recursive residual is
/// returned.
pub fn bicgstab(
    op: &dyn LinearOperator,
    m: Option<&dyn Preconditioner>,
    f: &[f64],
    cfg: &KrylovConfig,
) -> (Vec<f64>, SolveReport) {
    let n = op.dim();
    assert_eq!(f.len(), n, "right-hand side length must match the operator");

    let mut x = vec![0.0; n];
    let mut r = f.to_vec();
    let r0_norm = inf_norm(&r);
    let mut history = vec![if r0_norm == 0.0 { 0.0 } else { 1.0 }];
    let mut report = SolveReport {
        converged: false,
        failure: None,
        termination: Termination::MaxIterations,
        outer_iterations: 0.0,
        inner_iterations_avg: 0.0,
        preconditioner_applications: 0,
        final_relres: 0.0,
        residual_history: Vec::new(),
        reduced_size: 0,
        timings: StageTimings::default(),
    };
    if r0_norm == 0.0 || !r0_norm.is_finite() {
        report.converged = r0_norm == 0.0;
        report.termination = if report.converged {
            Termination::Converged
        } else {
            Termination::Breakdown
        };
        report.failure = (!report.converged).then_some(FailureClass::F2);
        report.final_relres = if report.converged { 0.0 } else { f64::NAN };
        report.residual_history = history;
        return (x, report);
    }

    let rhat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let (mut rho_prev, mut alpha, mut omega) = (1.0_f64, 1.0_f64, 1.0_f64);
    let mut inner_total = 0.0;
    let mut applications = 0usize;
    let mut best = (1.0_f64, x.clone());
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0.0;

    // true relres of `cand`, written into `scratch`
    let check = |cand: &[f64], scratch: &mut [f64]| -> f64 {
        true_residual(op, f, cand, scratch);
        inf_norm(scratch) / r0_norm
    };

    'outer: for it in 1..=cfg.max_iter {
        let rho = dot(&rhat, &r);
        if rho.abs() < BREAKDOWN_TOL || !rho.is_finite() {
            termination = Termination::Breakdown;
            break;
        }
        if it == 1 {
            p.copy_from_slice(&r);
        } else {
            let beta = (rho / rho_prev) * (alpha / omega);
            for ((pi, ri), vi) in p.iter_mut().zip(&r).zip(&v) {
                *pi = ri + beta * (*pi - omega * vi);
            }
        }
        precondition(m, &p, &mut phat, &mut inner_total, &mut applications);
        op.apply(&phat, &mut v);
        let rhat_v = dot(&rhat, &v);
        if rhat_v.abs() < BREAKDOWN_TOL || !rhat_v.is_finite() {
            termination = Termination::Breakdown;
            break;
        }
        alpha = rho / rhat_v;
        s.copy_from_slice(&r);
        axpy(-alpha, &v, &mut s);
        axpy(alpha, &phat, &mut x);

        let mut rel = inf_norm(&s) / r0_norm;
        history.push(rel);
        iterations = it as f64 - 0.5;
        if rel <= cfg.eps {
            let true_rel = check(&x, &mut scratch);
            if true_rel <= cfg.eps {
                termination = Termination::Converged;
                break 'outer;
            }
            s.copy_from_slice(&scratch);
            rel = true_rel;
        }
        if rel < best.0 {
            best = (rel, x.clone());
        }

        precondition(m, &s, &mut shat, &mut inner_total, &mut applications);
        op.apply(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 || !tt.is_finite() {
            termination = Termination::Breakdown;
            break;
        }
        omega = dot(&t, &s) / tt;
        axpy(omega, &shat, &mut x);
        r.copy_from_slice(&s);
        axpy(-omega, &t, &mut r);

        let mut rel = inf_norm(&r) / r0_norm;
        history.push(rel);
        iterations = it as f64;
        if rel <= cfg.eps {
            let true_rel = check(&x, &mut scratch);
            if true_rel <= cfg.eps {
                termination = Termination::Converged;
                break 'outer;
            }
            r.copy_from_slice(&scratch);
            rel = true_rel;
        }
        if rel < best.0 {
            best = (rel, x.clone());
        }
        if omega.abs() < BREAKDOWN_TOL || !omega.is_finite() {
            termination = Termination::Breakdown;
            break;
        }
        rho_prev = rho;
    }

    if termination != Termination::Converged {
        x = best.1;
    }
    let final_relres = check(&x, &mut scratch);
    let converged = termination == Termination::Converged;
    report.converged = converged;
    report.failure = (!converged).then_some(FailureClass::F2);
    report.termination = termination;
    report.outer_iterations = iterations;
    report.preconditioner_applications = applications;
    report.inner_iterations_avg = if applications == 0 {
        0.0
    } else {
        inner_total / applications as f64
    };
    report.final_relres = final_relres;
    report.residual_history = history;
    (x, report)
}
