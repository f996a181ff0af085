use std::path::Path;

use serde::{Deserialize, Serialize};

use coexist_core::bifurcation::assess_record;
use coexist_core::grid::write_fields_csv;
use coexist_core::steady::{
    check_apriori_against, default_seeds, deflated_solve, solve_logistic, Classification,
    ModelParams, SolutionRecord, Stability,
};
use coexist_core::Grid;

use crate::config::Config;
use crate::error::CliResult;
use crate::output::{ensure_dir, write_csv, write_json, write_with};

/// A record together with the diagnostics written by `solve`.
#[derive(Debug, Clone)]
pub struct SolvedRecord {
    pub record: SolutionRecord,
    pub leading_eig: [f64; 2],
    /// `None` for sign-changing roots, where the bounds do not apply.
    pub apriori_ok: Option<bool>,
}

/// One row of `solutions.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub index: usize,
    pub classification: Classification,
    pub stability: Stability,
    pub residual_norm: f64,
    pub iterations: usize,
    pub min_u: f64,
    pub max_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub re_mu_lead: f64,
    pub im_mu_lead: f64,
    pub apriori_ok: Option<bool>,
    pub fields: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub params: ModelParams,
    pub seed: u64,
    pub records: Vec<SolutionRow>,
    pub n_coexistence: usize,
    pub n_stable_coexistence: usize,
}

/// Deflated search from the default seeds plus a stability assessment of
/// every record found.
pub fn run_solve(grid: &Grid, params: &ModelParams, cfg: &Config) -> CliResult<Vec<SolvedRecord>> {
    let seeds = default_seeds(grid, params, cfg.seed)?;
    let records = deflated_solve(params, &seeds, &cfg.solver.solve_deflation())?;
    let theta_a = solve_logistic(grid, params.a)?;
    let theta_c = solve_logistic(grid, params.c)?;
    records
        .into_iter()
        .map(|mut record| {
            let spectrum = assess_record(&mut record)?;
            let lead = spectrum.first().map_or([f64::NAN, f64::NAN], |m| [m.re, m.im]);
            let apriori_ok = record
                .is_nonnegative()
                .then(|| check_apriori_against(&record, &theta_a, &theta_c));
            Ok(SolvedRecord {
                record,
                leading_eig: lead,
                apriori_ok,
            })
        })
        .collect()
}

pub fn solution_rows(solved: &[SolvedRecord]) -> Vec<SolutionRow> {
    solved
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let r = &s.record;
            SolutionRow {
                index: i,
                classification: r.classification,
                stability: r.stability,
                residual_norm: r.residual_norm,
                iterations: r.iterations,
                min_u: r.state.u.min(),
                max_u: r.state.u.max(),
                min_v: r.state.v.min(),
                max_v: r.state.v.max(),
                re_mu_lead: s.leading_eig[0],
                im_mu_lead: s.leading_eig[1],
                apriori_ok: s.apriori_ok,
                fields: format!("solution_{i}.csv"),
            }
        })
        .collect()
}

/// `solutions.csv`, `solutions.json` and one `solution_<k>.csv` per record.
pub fn cmd_solve(cfg: &Config, dir: &Path) -> CliResult<SolveSummary> {
    let grid = cfg.grid.build()?;
    let params = cfg.require_params()?;
    let solved = run_solve(&grid, &params, cfg)?;
    ensure_dir(dir)?;
    let rows = solution_rows(&solved);
    for (row, s) in rows.iter().zip(&solved) {
        let st = &s.record.state;
        write_with(&dir.join(&row.fields), |w| {
            write_fields_csv(w, &[("u", &st.u), ("v", &st.v)])
        })?;
    }
    write_csv(&dir.join("solutions.csv"), &rows)?;
    let coexist = |r: &&SolutionRow| r.classification == Classification::Coexistence;
    let summary = SolveSummary {
        params,
        seed: cfg.seed,
        n_coexistence: rows.iter().filter(coexist).count(),
        n_stable_coexistence: rows
            .iter()
            .filter(coexist)
            .filter(|r| r.stability == Stability::Stable)
            .count(),
        records: rows,
    };
    write_json(&dir.join("solutions.json"), &summary)?;
    Ok(summary)
}
