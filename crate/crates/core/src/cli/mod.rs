//! Command-line surface: `pe`, `eigcheck`, `count`, `bench`.

mod bench;
mod commands;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::RfpError;

pub use bench::{bench_propagation, parse_sizes, BenchRow};

/// Stable process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const NUMERIC: i32 = 4;
    pub const NOT_CONVERGED: i32 = 5;
    pub const ORACLE_CAP: i32 = 6;
}

/// Maps a toolkit error onto the exit-code table.
pub fn exit_code(e: &RfpError) -> i32 {
    match e {
        RfpError::InvalidConfig(_)
        | RfpError::OutOfRange(_)
        | RfpError::DimensionMismatch(_)
        | RfpError::UnsupportedDiagnostic(_) => exit::USAGE,
        RfpError::Io(_)
        | RfpError::Parse { .. }
        | RfpError::Format(_)
        | RfpError::NodeOutOfBounds { .. }
        | RfpError::SelfLoop(_) => exit::IO,
        RfpError::OracleCapExceeded { .. } => exit::ORACLE_CAP,
        RfpError::DegenerateColumn { .. }
        | RfpError::RankCollapse { .. }
        | RfpError::NumericOverflow { .. }
        | RfpError::Asymmetric(_)
        | RfpError::NotOrthonormal(_)
        | RfpError::InsufficientSteps { .. }
        | RfpError::UndefinedRho(_)
        | RfpError::InternalConsistency(_)
        | RfpError::Overflow(_) => exit::NUMERIC,
    }
}

#[derive(Debug, Parser)]
#[command(name = "rfp", version, about = "Random feature propagation toolkit")]
pub struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute positional-encoding features and write them to disk.
    Pe(PeArgs),
    /// Check subspace-iteration convergence against the dense oracle.
    Eigcheck(EigcheckArgs),
    /// Count triangles, quadrangles or closed walks.
    Count(CountArgs),
    /// Time sparse propagation on random regular graphs.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorArg {
    AdjNorm,
    LapNorm,
    AdjRaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    L2,
    Qr,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Normal,
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Rfpf,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountWhat {
    Triangles,
    Quadrangles,
    Walks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountMode {
    Exact,
    Estimate,
    Guaranteed,
}

#[derive(Debug, Args)]
pub struct PeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "adj-norm")]
    pub operator: OperatorArg,
    #[arg(long)]
    pub k: usize,
    /// Propagation steps P.
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "l2")]
    pub norm: NormArg,
    /// Normalization period w.
    #[arg(long, default_value_t = 1)]
    pub norm_every: usize,
    #[arg(long, value_enum, default_value = "normal")]
    pub dist: DistArg,
    /// Number of trajectories B.
    #[arg(long, default_value_t = 1)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional input node features (CSV or RFPF) prepended to the encoding.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "rfpf")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct EigcheckArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "adj-norm")]
    pub operator: OperatorArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::diagnostics::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub what: CountWhat,
    #[arg(long)]
    pub walk_length: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: CountMode,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma separated `n:m` pairs; each must admit a regular graph.
    #[arg(long)]
    pub sizes: String,
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Runs a parsed command line, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let threads = match cli.threads {
        Some(0) => {
            let _ = writeln!(err, "error: --threads must be at least 1");
            return exit::USAGE;
        }
        Some(t) => t,
        None => match &cli.command {
            // timings measure the kernel, not the scheduler
            Command::Bench(_) => 1,
            _ => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit::USAGE;
        }
    };
    let (result, out_buf, err_buf) = pool.install(|| {
        let mut out_buf = Vec::new();
        let mut err_buf = Vec::new();
        let result = match &cli.command {
            Command::Pe(a) => commands::pe(a, &mut out_buf, &mut err_buf),
            Command::Eigcheck(a) => commands::eigcheck(a, &mut out_buf, &mut err_buf),
            Command::Count(a) => commands::count(a, &mut out_buf, &mut err_buf),
            Command::Bench(a) => bench::run(a, &mut out_buf),
        };
        (result, out_buf, err_buf)
    });
    let _ = out.write_all(&out_buf);
    let _ = err.write_all(&err_buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (without the program name) and runs them.
pub fn run_args<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("rfp")).chain(args.into_iter().map(Into::into));
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                exit::USAGE
            } else {
                let _ = write!(out, "{e}");
                exit::OK
            }
        }
    }
}
