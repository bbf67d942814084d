//! `fdbisim` — check, refute, and explore bisimulations on Feller–Dynkin
//! processes and finite labelled Markov processes.
//!
//! Exit codes: 0 success, 1 relation refuted / gallery failure, 2 argument
//! syntax (from the parser), 64 usage or unsupported-request errors, 65
//! unreadable or invalid model/relation files, 70 internal invariant
//! violations.

mod cmds;
mod dsl;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Failures carrying their process exit class.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or an unsupported request (exit 64).
    Usage(String),
    /// Unreadable, unparsable, or invalid input files (exit 65).
    Model(String),
    /// A broken internal invariant (exit 70).
    Internal(String),
}

impl CliError {
    /// Wrap an error from a core computation whose inputs were already
    /// validated; any failure there is a library invariant violation.
    pub fn internal(e: impl fmt::Display) -> Self {
        CliError::Internal(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Model(_) => 65,
            CliError::Internal(_) => 70,
        }
    }

    fn class(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Model(_) => "model",
            CliError::Internal(_) => "internal",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (CliError::Usage(m) | CliError::Model(m) | CliError::Internal(m)) = self;
        write!(f, "{m}")
    }
}

pub type CliResult = Result<u8, CliError>;

#[derive(Parser)]
#[command(
    name = "fdbisim",
    version,
    about = "Bisimulation checking for Feller-Dynkin processes and labelled Markov processes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify a relation witness against a model (exit 0 pass, 1 refuted)
    Check {
        /// Model file
        model: PathBuf,
        /// Relation witness file (defaults to the witness embedded in the model)
        relation: Option<PathBuf>,
        /// Monte-Carlo paths per statistical check
        #[arg(long, default_value_t = 20_000)]
        n: u64,
        /// RNG seed (default: $FDBISIM_SEED, then 12345)
        #[arg(long)]
        seed: Option<u64>,
        /// Rejection threshold for statistical z-scores
        #[arg(long, default_value_t = fdbisim_core::stats::Z_CRIT)]
        zcrit: f64,
        /// Walk resolution for statistical law checks
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Hunt for an event law separating two states
    Distinguish {
        /// Model file
        model: PathBuf,
        /// First state
        #[arg(allow_negative_numbers = true)]
        x: String,
        /// Second state
        #[arg(allow_negative_numbers = true)]
        y: String,
        /// Statistic family: hitting-time CDFs, Laplace transforms, or
        /// finite observation words
        #[arg(long, default_value = "bt", value_parser = ["bt", "laplace", "word"])]
        family: String,
        /// Monte-Carlo paths per estimate
        #[arg(long, default_value_t = 20_000)]
        n: u64,
        /// RNG seed (default: $FDBISIM_SEED, then 12345)
        #[arg(long)]
        seed: Option<u64>,
        /// Rejection threshold for statistical z-scores
        #[arg(long, default_value_t = fdbisim_core::stats::Z_CRIT)]
        zcrit: f64,
    },
    /// Sample trajectories and print them as CSV
    Simulate {
        /// Model file
        model: PathBuf,
        /// Start state
        #[arg(allow_negative_numbers = true)]
        x0: String,
        /// Number of trajectories
        #[arg(long, default_value_t = 10)]
        paths: u64,
        /// Override the model horizon
        #[arg(long)]
        horizon: Option<f64>,
        /// Override the model grid step
        #[arg(long)]
        grid_step: Option<f64>,
        /// RNG seed (default: $FDBISIM_SEED, then 12345)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Closed-form vs simulated hitting-time statistics (CSV)
    Hittime {
        /// Model file
        model: PathBuf,
        /// Start state
        #[arg(allow_negative_numbers = true)]
        x0: String,
        /// Target level
        #[arg(allow_negative_numbers = true)]
        target: f64,
        /// Report the CDF P(T ≤ t)
        #[arg(long)]
        t: Option<f64>,
        /// Report the Laplace transform E[exp(−λT)]
        #[arg(long)]
        lambda: Option<f64>,
        /// Monte-Carlo paths
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        /// RNG seed (default: $FDBISIM_SEED, then 12345)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Greatest bisimulation of a finite model (partition refinement)
    Refine {
        /// Finite model file
        model: PathBuf,
    },
    /// Lift the discrete greatest bisimulation to the unit-clock embedding
    Embed {
        /// Finite model file
        model: PathBuf,
    },
    /// Glue two finite models along a span and print the pushout
    Pushout {
        /// Left model (target of f)
        m1: PathBuf,
        /// Apex model (source of both legs)
        m2: PathBuf,
        /// Right model (target of g)
        m3: PathBuf,
        /// Left leg: comma-separated image states, one per apex state
        f_spec: String,
        /// Right leg: comma-separated image states, one per apex state
        g_spec: String,
        /// Also verify the universal property against small cocones
        #[arg(long)]
        universal: bool,
    },
    /// Parse a model (and optionally a relation) and print the canonical form
    Canon {
        /// Model file
        model: PathBuf,
        /// Relation witness file to canonicalize against the model
        relation: Option<PathBuf>,
    },
    /// Run the whole worked-example gallery (exit 0 iff everything passes)
    Gallery {
        /// RNG seed (default: $FDBISIM_SEED, then 12345)
        #[arg(long)]
        seed: Option<u64>,
        /// Monte-Carlo paths per statistical check
        #[arg(long, default_value_t = 20_000)]
        n_paths: u64,
    },
}

const DEFAULT_SEED: u64 = 12345;

/// Seed precedence: `--seed` flag, then `FDBISIM_SEED`, then a fixed default.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("FDBISIM_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("FDBISIM_SEED is not an integer: `{v}`"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.cmd {
        Cmd::Check { model, relation, n, seed, zcrit, grid_step } => {
            let opts =
                cmds::CheckOpts { n, seed: resolve_seed(seed)?, zcrit, grid_step };
            cmds::cmd_check(&model, relation.as_deref(), &opts)
        }
        Cmd::Distinguish { model, x, y, family, n, seed, zcrit } => {
            let opts = cmds::DistOpts { family, n, seed: resolve_seed(seed)?, zcrit };
            cmds::cmd_distinguish(&model, &x, &y, &opts)
        }
        Cmd::Simulate { model, x0, paths, horizon, grid_step, seed } => {
            let opts =
                cmds::SimOpts { paths, horizon, grid_step, seed: resolve_seed(seed)? };
            cmds::cmd_simulate(&model, &x0, &opts)
        }
        Cmd::Hittime { model, x0, target, t, lambda, n, seed } => {
            let opts = cmds::HitOpts { t, lambda, n, seed: resolve_seed(seed)? };
            cmds::cmd_hittime(&model, &x0, target, &opts)
        }
        Cmd::Refine { model } => cmds::cmd_refine(&model),
        Cmd::Embed { model } => cmds::cmd_embed(&model),
        Cmd::Pushout { m1, m2, m3, f_spec, g_spec, universal } => {
            cmds::cmd_pushout(&m1, &m2, &m3, &f_spec, &g_spec, universal)
        }
        Cmd::Canon { model, relation } => cmds::cmd_canon(&model, relation.as_deref()),
        Cmd::Gallery { seed, n_paths } => cmds::cmd_gallery(resolve_seed(seed)?, n_paths),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.class());
            ExitCode::from(e.exit_code())
        }
    }
}
