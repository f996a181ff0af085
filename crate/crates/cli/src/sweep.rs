use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use coexist_core::bifurcation::{threshold_a0, threshold_c0};
use coexist_core::steady::{
    check_apriori_against, default_seeds, deflated_solve, solve_logistic, ModelParams,
};
use coexist_core::Grid;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_csv, write_json, Check};

/// Margin above `λ_1` below which a rate counts as subcritical.
pub const SUBCRITICAL_MARGIN: f64 = 1e-6;

/// Where a cell sits relative to `λ_1` and the invasion thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// `a ≤ λ_1` or `c ≤ λ_1`: no coexistence state can exist.
    Subcritical,
    /// `a > a_0` and `c > c_0`: each species invades the other.
    MutualInvasion,
    /// `λ_1 < a < a_0` and `λ_1 < c < c_0`: neither invades.
    MutualExclusion,
    /// One invasion threshold crossed, the other not.
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountClass {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "one+")]
    OnePlus,
    #[serde(rename = "two+")]
    TwoPlus,
}

impl CountClass {
    pub fn of(n: usize) -> Self {
        match n {
            0 => CountClass::None,
            1 => CountClass::OnePlus,
            _ => CountClass::TwoPlus,
        }
    }
}

/// One row of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub index: usize,
    pub a: f64,
    pub c: f64,
    pub lambda1: f64,
    /// Undefined when `c ≤ λ_1`.
    pub a0: Option<f64>,
    /// Undefined when `a ≤ λ_1`.
    pub c0: Option<f64>,
    pub region: Region,
    pub n_records: usize,
    pub n_coexistence: usize,
    pub class: CountClass,
    /// All records satisfy `u ≤ θ_a ≤ a`, `v ≤ θ_c ≤ c`.
    pub apriori_ok: bool,
    /// Empty on success, otherwise the solver error.
    pub error: String,
}

pub fn region_of(a: f64, c: f64, lambda1: f64, a0: Option<f64>, c0: Option<f64>) -> Region {
    if a <= lambda1 + SUBCRITICAL_MARGIN || c <= lambda1 + SUBCRITICAL_MARGIN {
        return Region::Subcritical;
    }
    let (a0, c0) = (a0.unwrap_or(lambda1), c0.unwrap_or(lambda1));
    match (a > a0, c > c0) {
        (true, true) => Region::MutualInvasion,
        (false, false) => Region::MutualExclusion,
        _ => Region::OneSided,
    }
}

/// Seed of cell `index`, independent of the order cells are processed in.
pub fn cell_seed(global: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(global);
    rng.set_stream(index as u64);
    rng.next_u64()
}

fn optional(r: coexist_core::Result<f64>, resident_rate: f64, lambda1: f64) -> CliResult<Option<f64>> {
    if resident_rate <= lambda1 + 1e-8 {
        Ok(None)
    } else {
        Ok(Some(r?))
    }
}

fn solve_cell(cfg: &Config, grid: &Grid, base: &ModelParams, index: usize, a: f64, c: f64) -> RegionCell {
    let lambda1 = grid.discrete_lambda1();
    let params = base.with_a(a).with_c(c);
    let mut cell = RegionCell {
        index,
        a,
        c,
        lambda1,
        a0: None,
        c0: None,
        region: Region::Subcritical,
        n_records: 0,
        n_coexistence: 0,
        class: CountClass::None,
        apriori_ok: true,
        error: String::new(),
    };
    let body = |cell: &mut RegionCell| -> CliResult<()> {
        cell.a0 = optional(threshold_a0(grid, &params), c, lambda1)?;
        cell.c0 = optional(threshold_c0(grid, &params), a, lambda1)?;
        cell.region = region_of(a, c, lambda1, cell.a0, cell.c0);
        let seeds = default_seeds(grid, &params, cell_seed(cfg.seed, index))?;
        let records = deflated_solve(&params, &seeds, &cfg.solver.sweep_deflation())?;
        let theta_a = solve_logistic(grid, a)?;
        let theta_c = solve_logistic(grid, c)?;
        cell.n_records = records.len();
        cell.n_coexistence = records.iter().filter(|r| r.is_coexistence()).count();
        cell.class = CountClass::of(cell.n_coexistence);
        cell.apriori_ok = records
            .iter()
            .filter(|r| r.is_nonnegative())
            .all(|r| check_apriori_against(r, &theta_a, &theta_c));
        Ok(())
    };
    if let Err(e) = body(&mut cell) {
        cell.error = e.to_string();
    }
    cell
}

/// Runs every cell of the configured `(a, c)` grid on a pool of `workers`
/// threads. Output order is the cell index, `a` fastest.
pub fn run_sweep(cfg: &Config, workers: Option<usize>) -> CliResult<Vec<RegionCell>> {
    let grid = cfg.grid.build()?;
    let base = cfg.require_params()?;
    let a_values = cfg.sweep.a_values();
    let c_values = cfg.sweep.c_values();
    let jobs: Vec<(usize, f64, f64)> = c_values
        .iter()
        .flat_map(|&c| a_values.iter().map(move |&a| (a, c)))
        .enumerate()
        .map(|(i, (a, c))| (i, a, c))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(i, a, c)| solve_cell(cfg, &grid, &base, i, a, c))
            .collect()
    }))
}

/// Expected counts per region, checked cell by cell.
pub fn region_checks(cells: &[RegionCell]) -> Vec<Check> {
    let count = |pred: &dyn Fn(&RegionCell) -> bool| cells.iter().filter(|c| pred(c)).count() as f64;
    vec![
        Check::at_most(
            "subcritical cells reporting coexistence",
            count(&|c| c.region == Region::Subcritical && c.n_coexistence > 0),
            0.0,
        ),
        Check::at_most(
            "mutual-invasion cells without coexistence",
            count(&|c| c.region == Region::MutualInvasion && c.n_coexistence == 0),
            0.0,
        ),
        Check::at_most(
            "mutual-exclusion cells without coexistence",
            count(&|c| c.region == Region::MutualExclusion && c.n_coexistence == 0),
            0.0,
        ),
        Check::at_most("cells violating a priori bounds", count(&|c| !c.apriori_ok), 0.0),
        Check::at_most("cells with solver errors", count(&|c| !c.error.is_empty()), 0.0),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub cells: usize,
    pub subcritical: usize,
    pub mutual_invasion: usize,
    pub mutual_exclusion: usize,
    pub one_sided: usize,
    pub max_coexistence: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn summarize(cfg: &Config, cells: &[RegionCell]) -> SweepSummary {
    let in_region = |r: Region| cells.iter().filter(|c| c.region == r).count();
    let checks = region_checks(cells);
    SweepSummary {
        seed: cfg.seed,
        cells: cells.len(),
        subcritical: in_region(Region::Subcritical),
        mutual_invasion: in_region(Region::MutualInvasion),
        mutual_exclusion: in_region(Region::MutualExclusion),
        one_sided: in_region(Region::OneSided),
        max_coexistence: cells.iter().map(|c| c.n_coexistence).max().unwrap_or(0),
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// `sweep.csv` and `sweep.json` in `dir`.
pub fn cmd_sweep(cfg: &Config, dir: &Path, workers: Option<usize>) -> CliResult<SweepSummary> {
    let cells = run_sweep(cfg, workers)?;
    ensure_dir(dir)?;
    write_csv(&dir.join("sweep.csv"), &cells)?;
    let summary = summarize(cfg, &cells);
    write_json(&dir.join("sweep.json"), &summary)?;
    Ok(summary)
}
