//! Batch front-end: parses run configurations, dispatches to the solvers
//! and sweep drivers, and serializes records and fields.
//!
//! Exit codes: `0` success, `2` configuration error, `3` numerical failure,
//! `4` acceptance-gate failure (an identity or inequality residual exceeded
//! its tolerance; the offending artifact is still written for inspection).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

/// Command failure carrying its process exit code.
#[derive(Debug)]
pub enum CmdError {
    /// Bad configuration, arguments, or I/O destination (exit 2).
    Config(String),
    /// Solver or serialization failure (exit 3).
    Numerical(String),
    /// A quality gate was exceeded after a successful solve (exit 4).
    Gate(String),
}

impl CmdError {
    fn exit_code(&self) -> u8 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Numerical(_) => 3,
            CmdError::Gate(_) => 4,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Config(m) => write!(f, "configuration error: {m}"),
            CmdError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CmdError::Gate(m) => write!(f, "acceptance gate failed: {m}"),
        }
    }
}

impl From<pipeflow::Error> for CmdError {
    fn from(e: pipeflow::Error) -> Self {
        match e {
            // Domain preconditions (grid too small, alpha out of range, ...)
            // are configuration problems; everything else is numerical.
            pipeflow::Error::InvalidParameter(_) => CmdError::Config(e.to_string()),
            other => CmdError::Numerical(other.to_string()),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Run configuration file (key-value text or JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory receiving all output artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the random seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Parser)]
#[command(
    name = "pipeflow",
    version,
    about = "Spectral solvers for axisymmetric pipe-flow perturbations with Navier slip"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one meridional (stream-function) mode and record its norms.
    SolveLinear(CommonArgs),
    /// Solve one swirl mode and record its norms.
    SolveSwirl(CommonArgs),
    /// Run a parameter sweep and fit scaling laws to the records.
    Sweep(CommonArgs),
    /// Check the weighted integral inequalities on random samples.
    Inequalities(CommonArgs),
    /// Tabulate parameter regimes over a grid.
    Regimes(CommonArgs),
    /// Run the nonlinear fixed-point iteration on a periodic pipe.
    SolveNonlinear(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::SolveLinear(a)
            | Command::SolveSwirl(a)
            | Command::Sweep(a)
            | Command::Inequalities(a)
            | Command::Regimes(a)
            | Command::SolveNonlinear(a) => a,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CmdError> {
    let args = cli.command.args();
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CmdError::Config(format!("cannot set thread count: {e}")))?;
    }
    let cfg = config::RawConfig::load(&args.config)?;
    match &cli.command {
        Command::SolveLinear(a) => commands::solve_linear::run(&cfg, a),
        Command::SolveSwirl(a) => commands::solve_swirl::run(&cfg, a),
        Command::Sweep(a) => commands::sweep::run(&cfg, a),
        Command::Inequalities(a) => commands::inequalities::run(&cfg, a),
        Command::Regimes(a) => commands::regimes::run(&cfg, a),
        Command::SolveNonlinear(a) => commands::solve_nonlinear::run(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
