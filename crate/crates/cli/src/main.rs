use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ddps::{par, DdpsConfig, ReducedMode};
use ddps_cli::*;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PartitionerArg {
    Contiguous,
    Bisection,
    File,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReducedArg {
    Auto,
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Output {
    Text,
    Csv,
    Json,
}

/// Solve a sparse linear system with the DDPS hybrid solver.
#[derive(Debug, Parser)]
#[command(name = "ddps", version)]
struct Args {
    /// Matrix Market file.
    #[arg(long)]
    matrix: PathBuf,
    /// Right-hand side as a Matrix Market vector.
    #[arg(
        long,
        conflicts_with = "rhs_ones",
        required_unless_present = "rhs_ones"
    )]
    rhs: Option<PathBuf>,
    /// Use f = A·1 so the exact solution is all ones.
    #[arg(long)]
    rhs_ones: bool,
    #[arg(long, default_value_t = 4)]
    partitions: usize,
    #[arg(long, value_enum, default_value_t = PartitionerArg::Contiguous)]
    partitioner: PartitionerArg,
    /// One 0-based part id per row (METIS style).
    #[arg(long, required_if_eq("partitioner", "file"))]
    partition_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.9)]
    delta: f64,
    #[arg(long, default_value_t = 1e-5)]
    eps_out: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps_in: f64,
    #[arg(long, default_value_t = 1000)]
    max_outer: usize,
    #[arg(long, default_value_t = 100)]
    max_inner: usize,
    #[arg(long, value_enum, default_value_t = ReducedArg::Auto)]
    reduced: ReducedArg,
    /// Shift singular blocks by this fraction of their ∞-norm and retry.
    #[arg(long)]
    perturb: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
    /// Comma-separated partition counts; turns on sweep mode.
    #[arg(long)]
    sweep_p: Option<String>,
    /// Comma-separated drop tolerances; turns on sweep mode.
    #[arg(long)]
    sweep_delta: Option<String>,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("ddps: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match args.threads {
        Some(0) => fail(EXIT_USAGE, "--threads must be at least 1"),
        Some(t) => par::with_threads(t, || execute(&args)),
        None => execute(&args),
    }
}

fn execute(args: &Args) -> ExitCode {
    let rhs = match &args.rhs {
        Some(path) => Rhs::File(path.clone()),
        None => Rhs::Ones,
    };
    let partitioner = match args.partitioner {
        PartitionerArg::Contiguous => Partitioner::Contiguous,
        PartitionerArg::Bisection => Partitioner::Bisection,
        PartitionerArg::File => Partitioner::File(args.partition_file.clone().unwrap_or_default()),
    };
    let config = DdpsConfig {
        partitions: args.partitions,
        delta: args.delta,
        eps_out: args.eps_out,
        eps_in: args.eps_in,
        max_outer: args.max_outer,
        max_inner: args.max_inner,
        reduced: match args.reduced {
            ReducedArg::Auto => ReducedMode::Auto,
            ReducedArg::Direct => ReducedMode::Direct,
            ReducedArg::Iterative => ReducedMode::Iterative,
        },
        perturb: args.perturb,
        ..DdpsConfig::default()
    };

    let problem = match Problem::load(&args.matrix, &rhs) {
        Ok(p) => p,
        Err(e) => return fail(error_exit_code(&e), e),
    };

    let sweeping = args.sweep_p.is_some() || args.sweep_delta.is_some();
    let records = if sweeping {
        let ps = match &args.sweep_p {
            Some(s) => parse_list(s),
            None => Ok(vec![args.partitions]),
        };
        let deltas = match &args.sweep_delta {
            Some(s) => parse_list(s),
            None => Ok(vec![args.delta]),
        };
        match (ps, deltas) {
            (Ok(ps), Ok(ds)) => sweep(&problem, &partitioner, &config, &ps, &ds),
            (Err(e), _) | (_, Err(e)) => return fail(EXIT_USAGE, e),
        }
    } else {
        vec![run(&problem, &partitioner, &config)]
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let written = match (args.output, sweeping) {
        (Output::Csv, true) => write_sweep_csv(&mut out, &records).map_err(|e| e.to_string()),
        (Output::Csv, false) => write_csv(&mut out, &records).map_err(|e| e.to_string()),
        (Output::Json, true) => {
            serde_json::to_writer_pretty(&mut out, &records).map_err(|e| e.to_string())
        }
        (Output::Json, false) => {
            serde_json::to_writer_pretty(&mut out, &records[0]).map_err(|e| e.to_string())
        }
        (Output::Text, _) => records
            .iter()
            .enumerate()
            .try_for_each(|(i, r)| {
                if i > 0 {
                    writeln!(out)?;
                }
                write_text(&mut out, r)
            })
            .map_err(|e| e.to_string()),
    };
    let written = match args.output {
        Output::Json => written.and_then(|_| writeln!(out).map_err(|e| e.to_string())),
        _ => written,
    };
    if let Err(e) = written {
        return fail(EXIT_IO, e);
    }

    for r in &records {
        if let Some(msg) = &r.message {
            eprintln!("ddps: {} p={} delta={:?}: {msg}", r.matrix, r.p, r.delta);
        }
    }
    let code = records
        .iter()
        .map(|r| r.status.exit_code())
        .find(|&c| c != EXIT_OK)
        .unwrap_or(EXIT_OK);
    ExitCode::from(code as u8)
}
