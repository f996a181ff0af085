//! Command-line front end: parameter-plane sweeps, threshold curves, branch
//! tracing, check recipes and single solves, writing CSV and JSON.

pub mod branch;
pub mod config;
pub mod error;
pub mod output;
pub mod solve;
pub mod sweep;
pub mod thresholds;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use coexist_core::bifurcation::BranchKind;

pub use config::Config;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "coexist", version, about = "Steady states of a diffusive competition system with saturation")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    A,
    C,
}

impl From<Which> for BranchKind {
    fn from(w: Which) -> Self {
        match w {
            Which::A => BranchKind::A,
            Which::C => BranchKind::C,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invasion thresholds a0(c) and c0(a) over the sweep ranges.
    Thresholds,
    /// Count coexistence states on every (a, c) cell.
    Sweep,
    /// Continue the branch bifurcating from a semi-trivial state.
    Branch {
        /// Branch to follow (overrides `[branch] which`).
        #[arg(long, value_enum)]
        which: Option<Which>,
    },
    /// Run a check recipe: 2.1, 2.3, 4.1, 4.2, 5.1, 5.2, 5.3, 6.1, 6.2 or 6.3.
    Verify { id: String },
    /// Find and classify all steady states for `[params]`.
    Solve,
}

/// Result of a command: whether its checks passed and a JSON summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub summary: serde_json::Value,
}

impl Outcome {
    fn from<T: Serialize>(passed: bool, value: &T) -> CliResult<Self> {
        Ok(Self {
            passed,
            summary: serde_json::to_value(value)?,
        })
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn resolve_config(cli: &Cli) -> CliResult<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if cli.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let cfg = resolve_config(cli)?;
    let dir = cfg.output.dir.clone();
    match &cli.command {
        Command::Thresholds => {
            let s = thresholds::cmd_thresholds(&cfg, &dir)?;
            Outcome::from(s.passed, &s)
        }
        Command::Sweep => {
            let s = sweep::cmd_sweep(&cfg, &dir, cli.workers)?;
            Outcome::from(s.passed, &s)
        }
        Command::Branch { which } => {
            let s = branch::cmd_branch(&cfg, &dir, which.map(Into::into))?;
            Outcome::from(s.passed, &s)
        }
        Command::Verify { id } => {
            let r = verify::cmd_verify(&cfg, &dir, id, cli.workers)?;
            Outcome::from(r.passed, &r)
        }
        Command::Solve => {
            let s = solve::cmd_solve(&cfg, &dir)?;
            Outcome::from(true, &s)
        }
    }
}
