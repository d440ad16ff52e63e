//! Run records and sweeps behind the `ddps` binary.

use std::io::Write;
use std::path::PathBuf;

use ddps::{
    read_matrix_market, read_vector, CsrMatrix, DdpsConfig, DdpsError, DdpsSolver, FailureClass,
    Partition, PartitionStrategy,
};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_SINGULAR: i32 = 5;
pub const EXIT_F2: i32 = 6;
pub const EXIT_F1: i32 = 7;

#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    File(PathBuf),
    /// `f = A·1`, so the exact solution is known.
    Ones,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Partitioner {
    Contiguous,
    Bisection,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    OK,
    F1,
    F2,
    SINGULAR,
    ERROR,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::OK => EXIT_OK,
            Status::F1 => EXIT_F1,
            Status::F2 => EXIT_F2,
            Status::SINGULAR => EXIT_SINGULAR,
            Status::ERROR => EXIT_USAGE,
        }
    }
}

/// Exit code for an error raised before any run could start.
pub fn error_exit_code(e: &DdpsError) -> i32 {
    match e {
        DdpsError::Io { .. } => EXIT_IO,
        DdpsError::Parse { .. } | DdpsError::UnsupportedField(_) | DdpsError::BadPartVector(_) => {
            EXIT_PARSE
        }
        DdpsError::SingularBlock(_) | DdpsError::ReducedSingular => EXIT_SINGULAR,
        DdpsError::OutOfMemory { .. } => EXIT_F1,
        _ => EXIT_USAGE,
    }
}

/// One solve. The same values are emitted in every output format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub matrix: String,
    pub n: usize,
    pub nnz: usize,
    pub p: usize,
    pub delta: f64,
    pub outer_iters: f64,
    pub inner_iters_avg: f64,
    pub relres: f64,
    pub status: Status,
    pub setup_s: f64,
    pub solve_s: f64,
    pub dd: f64,
    pub reduced_size: Option<usize>,
    /// `‖x − 1‖∞`, only for the all-ones solution.
    pub x_err: Option<f64>,
    pub reorder_s: f64,
    pub split_s: f64,
    pub factorize_s: f64,
    pub compute_g_s: f64,
    pub message: Option<String>,
}

/// Column subset written by [`write_sweep_csv`].
#[derive(Debug, Serialize)]
struct SweepRow<'a> {
    matrix: &'a str,
    n: usize,
    nnz: usize,
    p: usize,
    delta: f64,
    outer_iters: f64,
    inner_iters_avg: f64,
    relres: f64,
    status: Status,
    setup_s: f64,
    solve_s: f64,
}

pub const SWEEP_HEADER: [&str; 11] = [
    "matrix",
    "n",
    "nnz",
    "p",
    "delta",
    "outer_iters",
    "inner_iters_avg",
    "relres",
    "status",
    "setup_s",
    "solve_s",
];

/// A loaded problem: matrix, right-hand side and optional fixed partition.
pub struct Problem {
    pub name: String,
    pub a: CsrMatrix,
    pub f: Vec<f64>,
    pub ones: bool,
    pub dd: f64,
}

impl Problem {
    pub fn load(matrix: &PathBuf, rhs: &Rhs) -> ddps::Result<Self> {
        let a = read_matrix_market(matrix)?;
        if !a.is_square() {
            return Err(DdpsError::NotSquare {
                rows: a.n_rows(),
                cols: a.n_cols(),
            });
        }
        let (f, ones) = match rhs {
            Rhs::Ones => (a.spmv(&vec![1.0; a.n_cols()])?, true),
            Rhs::File(path) => {
                let f = read_vector(path)?;
                if f.len() != a.n_rows() {
                    return Err(DdpsError::DimensionMismatch {
                        expected: a.n_rows(),
                        got: f.len(),
                    });
                }
                (f, false)
            }
        };
        let dd = a.diag_dominance()?;
        let name = matrix
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| matrix.display().to_string());
        Ok(Problem {
            name,
            a,
            f,
            ones,
            dd,
        })
    }
}

/// Builds the solver strategy; a partition file is read against `n`.
pub fn strategy(
    partitioner: &Partitioner,
    n: usize,
    parts: usize,
) -> ddps::Result<PartitionStrategy> {
    Ok(match partitioner {
        Partitioner::Contiguous => PartitionStrategy::Contiguous,
        Partitioner::Bisection => PartitionStrategy::Bisection,
        Partitioner::File(path) => {
            PartitionStrategy::Given(Partition::read_file(path, n, Some(parts))?)
        }
    })
}

/// Runs one configuration; solver errors become a record, not an abort.
pub fn run(problem: &Problem, partitioner: &Partitioner, config: &DdpsConfig) -> RunRecord {
    let mut rec = RunRecord {
        matrix: problem.name.clone(),
        n: problem.a.n_rows(),
        nnz: problem.a.nnz(),
        p: config.partitions,
        delta: config.delta,
        outer_iters: 0.0,
        inner_iters_avg: 0.0,
        relres: f64::NAN,
        status: Status::ERROR,
        setup_s: 0.0,
        solve_s: 0.0,
        dd: problem.dd,
        reduced_size: None,
        x_err: None,
        reorder_s: 0.0,
        split_s: 0.0,
        factorize_s: 0.0,
        compute_g_s: 0.0,
        message: None,
    };
    let result = strategy(partitioner, rec.n, config.partitions).and_then(|partitioner| {
        let cfg = DdpsConfig {
            partitioner,
            ..config.clone()
        };
        DdpsSolver::setup(&problem.a, &cfg)?.solve(&problem.f)
    });
    match result {
        Ok((x, report)) => {
            let t = report.timings;
            rec.outer_iters = report.outer_iterations;
            rec.inner_iters_avg = report.inner_iterations_avg;
            rec.relres = report.final_relres;
            rec.status = match report.failure {
                None => Status::OK,
                Some(FailureClass::F1) => Status::F1,
                Some(FailureClass::F2) => Status::F2,
            };
            rec.setup_s = t.setup();
            rec.solve_s = t.solve;
            rec.reduced_size = Some(report.reduced_size);
            rec.reorder_s = t.reorder;
            rec.split_s = t.split;
            rec.factorize_s = t.factorize;
            rec.compute_g_s = t.compute_g;
            if problem.ones {
                rec.x_err = Some(x.iter().fold(0.0_f64, |m, v| m.max((v - 1.0).abs())));
            }
        }
        Err(e) => {
            rec.status = match e {
                DdpsError::SingularBlock(_) | DdpsError::ReducedSingular => Status::SINGULAR,
                DdpsError::OutOfMemory { .. } => Status::F1,
                _ => Status::ERROR,
            };
            rec.message = Some(e.to_string());
        }
    }
    rec
}

/// One run per `(p, δ)` pair, `p` outermost.
pub fn sweep(
    problem: &Problem,
    partitioner: &Partitioner,
    base: &DdpsConfig,
    ps: &[usize],
    deltas: &[f64],
) -> Vec<RunRecord> {
    let mut rows = Vec::with_capacity(ps.len() * deltas.len());
    for &p in ps {
        for &delta in deltas {
            let cfg = DdpsConfig {
                partitions: p,
                delta,
                ..base.clone()
            };
            rows.push(run(problem, partitioner, &cfg));
        }
    }
    rows
}

fn opt<T: std::fmt::Debug>(v: &Option<T>) -> String {
    v.as_ref().map(|v| format!("{v:?}")).unwrap_or_default()
}

// `{:?}` gives the shortest string that round-trips, like the CSV and JSON writers.
pub fn write_text(out: &mut impl Write, rec: &RunRecord) -> std::io::Result<()> {
    let lines = [
        ("matrix", rec.matrix.clone()),
        ("n", rec.n.to_string()),
        ("nnz", rec.nnz.to_string()),
        ("dd", format!("{:?}", rec.dd)),
        ("p", rec.p.to_string()),
        ("delta", format!("{:?}", rec.delta)),
        ("reduced_size", opt(&rec.reduced_size)),
        ("outer_iters", format!("{:?}", rec.outer_iters)),
        ("inner_iters_avg", format!("{:?}", rec.inner_iters_avg)),
        ("relres", format!("{:?}", rec.relres)),
        ("x_err", opt(&rec.x_err)),
        ("status", format!("{:?}", rec.status)),
        ("setup_s", format!("{:?}", rec.setup_s)),
        ("solve_s", format!("{:?}", rec.solve_s)),
        ("reorder_s", format!("{:?}", rec.reorder_s)),
        ("split_s", format!("{:?}", rec.split_s)),
        ("factorize_s", format!("{:?}", rec.factorize_s)),
        ("compute_g_s", format!("{:?}", rec.compute_g_s)),
    ];
    for (k, v) in lines {
        writeln!(out, "{k:<16}{v}")?;
    }
    if let Some(msg) = &rec.message {
        writeln!(out, "{:<16}{msg}", "message")?;
    }
    Ok(())
}

pub fn write_csv(out: impl Write, recs: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for rec in recs {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed sweep schema; an empty grid still writes the header.
pub fn write_sweep_csv(out: impl Write, recs: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in recs {
        w.serialize(SweepRow {
            matrix: &r.matrix,
            n: r.n,
            nnz: r.nnz,
            p: r.p,
            delta: r.delta,
            outer_iters: r.outer_iters,
            inner_iters_avg: r.inner_iters_avg,
            relres: r.relres,
            status: r.status,
            setup_s: r.setup_s,
            solve_s: r.solve_s,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Comma-separated list; the empty string is an empty grid.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("invalid list entry `{t}`")))
        .collect()
}
