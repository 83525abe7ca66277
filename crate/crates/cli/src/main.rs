//! Threshold sweeps, threshold tables, the ancilla check and the k-factor
//! map as CSV/JSON files.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nonlocality", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one property over a grid of the family parameter.
    Sweep(SweepArgs),
    /// Locate every threshold of a family and merge the stored constants.
    Table(TableArgs),
    /// Verify the fixed PPT ancilla and its trace values on the WI family.
    CheckAncilla(AncillaArgs),
    /// Tabulate the number of copies that guarantees nonlocality.
    Kfactor(KfactorArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Iteration cap of the semidefinite solver.
    #[arg(long, default_value_t = 50_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub sdp_max_iters: u64,
    /// Target gap between the solver's certified bounds.
    #[arg(long, default_value_t = 1e-6)]
    pub sdp_tol: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (written atomically); standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// wi, werner, isotropic, hirsch1 or hirsch2.
    #[arg(long)]
    pub family: String,
    /// Local dimension (werner and isotropic).
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Evaluate a single parameter value instead of a grid.
    #[arg(long, conflicts_with_all = ["pmin", "pmax", "steps"])]
    pub p: Option<f64>,
    /// Hirsch mixing weight (hirsch2).
    #[arg(long)]
    pub q: Option<f64>,
    /// eof, chsh, hn, sa, tlf or cglmp.
    #[arg(long)]
    pub property: String,
    #[arg(long, default_value_t = 0.0)]
    pub pmin: f64,
    #[arg(long, default_value_t = 1.0)]
    pub pmax: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    /// Number of q values on [0, 1] for a hirsch2 (p, q) grid.
    #[arg(long)]
    pub q_grid: Option<usize>,
    /// Number of p values on [pmin, pmax] for a hirsch2 (p, q) grid.
    #[arg(long)]
    pub p_grid: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub family: String,
    /// Largest local dimension (werner and isotropic rows run from 2).
    #[arg(long, default_value_t = 6)]
    pub dmax: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AncillaArgs {
    /// Check a single WI parameter instead of the default grid.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KfactorArgs {
    #[arg(long, default_value_t = 2)]
    pub dmin: usize,
    #[arg(long, default_value_t = 5)]
    pub dmax: usize,
    #[arg(long, default_value_t = 0.0)]
    pub fmin: f64,
    #[arg(long, default_value_t = 1.0)]
    pub fmax: f64,
    /// Number of f values per dimension.
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Process outcome; each variant has a fixed exit code.
#[derive(Debug)]
pub enum Failure {
    /// A verification did not hold (exit 1).
    Check(String),
    /// Invalid flags or an unsupported combination (exit 2).
    Usage(String),
    /// Reading or writing files failed (exit 3).
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Sweep(args) => commands::sweep(&args),
        Command::Table(args) => commands::table(&args),
        Command::CheckAncilla(args) => commands::check_ancilla(&args),
        Command::Kfactor(args) => commands::kfactor(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
