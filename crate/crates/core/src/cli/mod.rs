//! Command-line front end: one subcommand per experiment, JSON or CSV out.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::{flatten_csv, RunManifest};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "noisestab", version, about = "Noise stability of Gaussian and discrete partitions")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed (0 when absent; overrides the config's seed for `search`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 200_000)]
    pub samples: usize,
    /// Ornstein–Uhlenbeck time; ρ = e^{−t}.
    #[arg(long, global = true, conflicts_with = "rho")]
    pub t: Option<f64>,
    /// Correlation ρ = e^{−t}.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Output file (stdout when absent); the run manifest is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON config for commands that take one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TensorOp {
    Eigen,
    Ito,
    Variance,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate Stab_t of a partition file.
    Stability {
        #[arg(long)]
        partition: PathBuf,
    },
    /// Random balanced PTFs against the halfspace value.
    BorellCheck {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Smooth, threshold-round and optionally truncate a partition.
    Round {
        #[arg(long)]
        partition: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        /// Also extract a degree-d PTF from the Hermite truncation.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 40)]
        quad_order: usize,
    },
    /// Hermite expansion and spectral weights of a partition.
    Hermite {
        #[arg(long)]
        partition: PathBuf,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 40)]
        quad_order: usize,
    },
    /// Eigenregularity, Itô product or variance bounds of chaos polynomials.
    Tensor {
        #[arg(long, value_enum)]
        op: TensorOp,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        other: Option<PathBuf>,
    },
    /// Maximal-correlation basis of a joint distribution.
    Basis {
        #[arg(long)]
        dist: PathBuf,
    },
    /// Block strategies from a Gaussian partition on a discrete source.
    Simulate {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = 64)]
        ell: usize,
        /// Partition on R^{n₀} (median halfspace on R when absent).
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Exact analysis of a voting rule on the cube.
    Cube {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Stability maximization from a search config (--config).
    Search,
    /// Non-interactive correlation decider.
    Ncd {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        nu: Vec<f64>,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 2)]
        n_max: usize,
        /// Also run the exhaustive oracle at n = min(n_max, 2).
        #[arg(long)]
        oracle: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Stability { .. } => "stability",
            Self::BorellCheck { .. } => "borell-check",
            Self::Round { .. } => "round",
            Self::Hermite { .. } => "hermite",
            Self::Tensor { .. } => "tensor",
            Self::Basis { .. } => "basis",
            Self::Simulate { .. } => "simulate",
            Self::Cube { .. } => "cube",
            Self::Search => "search",
            Self::Ncd { .. } => "ncd",
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence(_) | Error::Numeric(_) | Error::NonFinite(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
