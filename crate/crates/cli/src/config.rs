use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use coexist_core::bifurcation::BranchKind;
use coexist_core::steady::{DeflationOptions, ModelParams, NewtonOptions};
use coexist_core::Grid;

use crate::error::{CliError, CliResult};

/// Run configuration, read from TOML. Every section is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub grid: GridConfig,
    /// Model constants. Required by `thresholds`, `sweep`, `branch` and
    /// `solve` (the sweep ignores `a` and `c`); `verify` falls back to
    /// built-in panels without it.
    pub params: Option<ModelParams>,
    pub sweep: SweepConfig,
    pub solver: SolverConfig,
    pub branch: BranchConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridConfig {
    Interval {
        #[serde(default = "default_length")]
        length: f64,
        #[serde(default = "default_n")]
        n: usize,
    },
    Rectangle {
        #[serde(default = "default_length")]
        lx: f64,
        #[serde(default = "default_length")]
        ly: f64,
        #[serde(default = "default_n2")]
        nx: usize,
        #[serde(default = "default_n2")]
        ny: usize,
    },
}

fn default_length() -> f64 {
    PI
}
fn default_n() -> usize {
    200
}
fn default_n2() -> usize {
    32
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::Interval {
            length: PI,
            n: 200,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> CliResult<Grid> {
        let grid = match *self {
            GridConfig::Interval { length, n } => Grid::interval(length, n),
            GridConfig::Rectangle { lx, ly, nx, ny } => Grid::rectangle(lx, ly, nx, ny),
        };
        grid.map_err(|e| CliError::Invalid(format!("grid: {e}")))
    }
}

/// Parameter-plane ranges; cells are `count` equispaced values from `min`
/// to `max` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub a_min: f64,
    pub a_max: f64,
    pub a_count: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub c_count: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            a_min: 0.5,
            a_max: 8.0,
            a_count: 15,
            c_min: 0.5,
            c_max: 8.0,
            c_count: 15,
        }
    }
}

pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    let step = (max - min) / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { max } else { min + step * i as f64 })
        .collect()
}

impl SweepConfig {
    pub fn a_values(&self) -> Vec<f64> {
        linspace(self.a_min, self.a_max, self.a_count)
    }

    pub fn c_values(&self) -> Vec<f64> {
        linspace(self.c_min, self.c_max, self.c_count)
    }

    fn validate(&self) -> CliResult<()> {
        for (name, min, max, count) in [
            ("a", self.a_min, self.a_max, self.a_count),
            ("c", self.c_min, self.c_max, self.c_count),
        ] {
            if !(min.is_finite() && max.is_finite() && min > 0.0 && max > min) {
                return Err(CliError::Invalid(format!(
                    "sweep {name}-range must satisfy 0 < min < max, got [{min}, {max}]"
                )));
            }
            if count < 2 {
                return Err(CliError::Invalid(format!(
                    "sweep {name}_count must be at least 2, got {count}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub newton_tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Deflated Newton runs per sweep cell.
    pub sweep_max_attempts: usize,
    /// Deflated Newton runs for `solve` and `verify`; unlimited if absent.
    pub solve_max_attempts: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let newton = NewtonOptions::default();
        Self {
            newton_tol: newton.tol,
            max_iterations: newton.max_iterations,
            max_halvings: newton.max_halvings,
            sweep_max_attempts: 12,
            solve_max_attempts: None,
        }
    }
}

impl SolverConfig {
    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.newton_tol,
            max_iterations: self.max_iterations,
            max_halvings: self.max_halvings,
        }
    }

    pub fn sweep_deflation(&self) -> DeflationOptions {
        DeflationOptions {
            newton: self.newton(),
            max_attempts: Some(self.sweep_max_attempts),
        }
    }

    pub fn solve_deflation(&self) -> DeflationOptions {
        DeflationOptions {
            newton: self.newton(),
            max_attempts: self.solve_max_attempts,
        }
    }

    fn validate(&self) -> CliResult<()> {
        if !(self.newton_tol.is_finite() && self.newton_tol > 0.0) || self.max_iterations == 0 {
            return Err(CliError::Invalid(
                "solver needs newton_tol > 0 and max_iterations ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BranchConfig {
    pub which: BranchKind,
    pub s_max: f64,
    pub steps: usize,
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self {
            which: BranchKind::A,
            s_max: 0.02,
            steps: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Gap `ε` between the sub- and supersolution rates.
    pub eps: f64,
    /// Saturation values scanned for the large-α checks.
    pub alphas: Vec<f64>,
    pub random_potentials: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            eps: 0.5,
            alphas: vec![1e2, 1e3, 1e4],
            random_potentials: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Invalid(message) => CliError::Config {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| CliError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.grid.build()?;
        if let Some(p) = &self.params {
            p.validate().map_err(|e| CliError::Invalid(format!("params: {e}")))?;
        }
        self.sweep.validate()?;
        self.solver.validate()?;
        Ok(())
    }

    pub fn require_params(&self) -> CliResult<ModelParams> {
        self.params
            .ok_or_else(|| CliError::Invalid("this command needs a [params] section".into()))
    }
}
