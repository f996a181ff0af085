use std::path::Path;

use serde::{Deserialize, Serialize};

use coexist_core::bifurcation::{threshold_a0, threshold_c0};

use crate::config::Config;
use crate::error::CliResult;
use crate::output::{ensure_dir, write_csv, write_json, Check};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    /// `a_0` as a function of `c`.
    A0OfC,
    /// `c_0` as a function of `a`.
    C0OfA,
}

/// One row of the thresholds CSV. Where the resident's rate is at most
/// `λ_1` it has no positive state and the threshold is `λ_1` itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub curve: Curve,
    pub x: f64,
    pub threshold: f64,
    pub resident_exists: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdSummary {
    pub lambda1: f64,
    /// A point `(a, c)` where both curves meet, located on the `c` grid.
    pub crossing: Option<[f64; 2]>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn threshold_rows(cfg: &Config) -> CliResult<Vec<ThresholdRow>> {
    let grid = cfg.grid.build()?;
    let p = cfg.require_params()?;
    let l1 = grid.discrete_lambda1();
    let mut rows = Vec::new();
    for c in cfg.sweep.c_values() {
        let exists = c > l1 + 1e-8;
        let threshold = if exists { threshold_a0(&grid, &p.with_c(c))? } else { l1 };
        rows.push(ThresholdRow {
            curve: Curve::A0OfC,
            x: c,
            threshold,
            resident_exists: exists,
        });
    }
    for a in cfg.sweep.a_values() {
        let exists = a > l1 + 1e-8;
        let threshold = if exists { threshold_c0(&grid, &p.with_a(a))? } else { l1 };
        rows.push(ThresholdRow {
            curve: Curve::C0OfA,
            x: a,
            threshold,
            resident_exists: exists,
        });
    }
    Ok(rows)
}

fn nondecreasing(rows: &[&ThresholdRow]) -> f64 {
    rows.windows(2)
        .map(|w| (w[0].threshold - w[1].threshold).max(0.0))
        .fold(0.0, f64::max)
}

/// Sign change of `g(c) = c - c_0(a_0(c))` between neighbouring grid values,
/// refined by linear interpolation.
fn crossing(cfg: &Config, a0_rows: &[&ThresholdRow]) -> CliResult<Option<[f64; 2]>> {
    let grid = cfg.grid.build()?;
    let p = cfg.require_params()?;
    let l1 = grid.discrete_lambda1();
    let mut prev: Option<(f64, f64, f64)> = None;
    for row in a0_rows.iter().filter(|r| r.resident_exists && r.threshold > l1 + 1e-8) {
        let c0 = threshold_c0(&grid, &p.with_a(row.threshold))?;
        let g = row.x - c0;
        if let Some((c_prev, a_prev, g_prev)) = prev {
            if g_prev == 0.0 {
                return Ok(Some([a_prev, c_prev]));
            }
            if g_prev * g < 0.0 {
                let t = g_prev / (g_prev - g);
                return Ok(Some([
                    a_prev + t * (row.threshold - a_prev),
                    c_prev + t * (row.x - c_prev),
                ]));
            }
        }
        prev = Some((row.x, row.threshold, g));
    }
    Ok(None)
}

pub fn cmd_thresholds(cfg: &Config, dir: &Path) -> CliResult<ThresholdSummary> {
    let rows = threshold_rows(cfg)?;
    ensure_dir(dir)?;
    write_csv(&dir.join("thresholds.csv"), &rows)?;
    let lambda1 = cfg.grid.build()?.discrete_lambda1();
    let a0: Vec<&ThresholdRow> = rows.iter().filter(|r| r.curve == Curve::A0OfC).collect();
    let c0: Vec<&ThresholdRow> = rows.iter().filter(|r| r.curve == Curve::C0OfA).collect();
    let floor = rows
        .iter()
        .map(|r| lambda1 - r.threshold)
        .fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        Check::at_most("a0(c) largest decrease", nondecreasing(&a0), 1e-10),
        Check::at_most("c0(a) largest decrease", nondecreasing(&c0), 1e-10),
        Check::at_most("largest amount below lambda1", floor, 1e-10),
    ];
    let summary = ThresholdSummary {
        lambda1,
        crossing: crossing(cfg, &a0)?,
        passed: checks.iter().all(|c| c.passed),
        checks,
    };
    write_json(&dir.join("thresholds.json"), &summary)?;
    Ok(summary)
}
