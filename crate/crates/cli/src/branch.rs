use std::path::Path;

use serde::{Deserialize, Serialize};

use coexist_core::bifurcation::{continue_branch, extrapolate_to_zero, Branch, BranchKind};

use crate::config::Config;
use crate::error::CliResult;
use crate::output::{ensure_dir, write_csv, write_json, Check};

/// Indicators smaller than this in magnitude leave the stability sign open.
pub const INDICATOR_FLOOR: f64 = 0.05;
/// Relative tolerance between the quadrature and continuation values of the
/// first-order coefficient.
pub const SLOPE_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub s: f64,
    pub param_value: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub re_mu_lead: f64,
    pub im_mu_lead: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchSummary {
    pub which: BranchKind,
    pub threshold: f64,
    pub coeff1_quadrature: f64,
    pub coeff1_slope: Option<f64>,
    pub stability_indicator: f64,
    pub stable_flags: Vec<bool>,
    pub truncated: Option<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn branch_rows(branch: &Branch) -> Vec<BranchRow> {
    branch
        .points
        .iter()
        .map(|p| BranchRow {
            s: p.s,
            param_value: p.param_value,
            min_u: p.state.u.min(),
            max_u: p.state.u.max(),
            min_v: p.state.v.min(),
            max_v: p.state.v.max(),
            re_mu_lead: p.leading_eig.re,
            im_mu_lead: p.leading_eig.im,
            stable: p.stable,
        })
        .collect()
}

/// Polynomial extrapolation of `(p(s) - p_0)/s` to `s = 0` over all points.
pub fn slope_estimate(branch: &Branch) -> Option<f64> {
    let (s, q): (Vec<f64>, Vec<f64>) = branch.slopes().into_iter().unzip();
    (s.len() >= 2).then(|| extrapolate_to_zero(&s, &q).ok()).flatten()
}

pub fn summarize(branch: &Branch) -> BranchSummary {
    let quad = branch.data.coeff1;
    let slope = slope_estimate(branch);
    let ind = branch.data.stability_indicator;
    let flags: Vec<bool> = branch.points.iter().map(|p| p.stable).collect();
    let mut checks = Vec::new();
    checks.push(Check::flag("branch complete", branch.truncated.is_none()));
    match slope {
        Some(sl) => checks.push(Check::at_most(
            "relative gap between quadrature and slope",
            (sl - quad).abs() / quad.abs().max(f64::MIN_POSITIVE),
            SLOPE_TOL,
        )),
        None => checks.push(Check::flag("slope estimate available", false)),
    }
    if ind.abs() > INDICATOR_FLOOR {
        let expect = ind > 0.0;
        checks.push(
            Check::flag(
                "stability flags follow indicator sign",
                !flags.is_empty() && flags.iter().all(|&f| f == expect),
            )
            .with_note(format!("indicator {ind:.6}")),
        );
    }
    BranchSummary {
        which: branch.data.which,
        threshold: branch.data.threshold,
        coeff1_quadrature: quad,
        coeff1_slope: slope,
        stability_indicator: ind,
        stable_flags: flags,
        truncated: branch.truncated.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

pub fn run_branch(cfg: &Config, which: Option<BranchKind>) -> CliResult<Branch> {
    let grid = cfg.grid.build()?;
    let p = cfg.require_params()?;
    let which = which.unwrap_or(cfg.branch.which);
    Ok(continue_branch(&grid, &p, which, cfg.branch.s_max, cfg.branch.steps)?)
}

/// `branch_<a|c>.csv` and `branch_<a|c>.json` in `dir`.
pub fn cmd_branch(cfg: &Config, dir: &Path, which: Option<BranchKind>) -> CliResult<BranchSummary> {
    let branch = run_branch(cfg, which)?;
    let tag = match branch.data.which {
        BranchKind::A => "a",
        BranchKind::C => "c",
    };
    ensure_dir(dir)?;
    write_csv(&dir.join(format!("branch_{tag}.csv")), &branch_rows(&branch))?;
    let summary = summarize(&branch);
    write_json(&dir.join(format!("branch_{tag}.json")), &summary)?;
    Ok(summary)
}
