use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use coexist_core::bifurcation::{
    continue_branch, extrapolate_to_zero, threshold_a0, Branch, BranchKind,
};
use coexist_core::eigen::{admissible_m, principal_eigenvalue, spectral_radius_indicator};
use coexist_core::steady::{
    alpha_scan, default_seeds, deflated_solve, solve_logistic, verify_sub_super, ModelParams,
    Stability,
};
use coexist_core::{Grid, ScalarField};

use crate::branch::INDICATOR_FLOOR;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{all_passed, ensure_dir, write_json, Check};
use crate::solve::run_solve;
use crate::sweep::{region_checks, run_sweep, Region};

pub const CHECK_IDS: [&str; 10] = [
    "2.1", "2.3", "4.1", "4.2", "5.1", "5.2", "5.3", "6.1", "6.2", "6.3",
];

/// Relative tolerance on `μ(s)/s` against the stability indicator.
pub const EIG_RATIO_TOL: f64 = 0.10;
/// Largest admissible ratio of shape errors between `s/2` and `s`.
pub const SHAPE_RATIO_TOL: f64 = 0.6;
/// Tolerance on `|r - 1|` at a critical potential.
pub const CRITICAL_RADIUS_TOL: f64 = 5e-6;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub id: String,
    pub claim: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn params(a: f64, b: f64, c: f64, d: f64, alpha: f64, beta: f64) -> ModelParams {
    ModelParams { a, b, c, d, alpha, beta }
}

/// Closed-form symmetric case.
pub fn symmetric_panel() -> ModelParams {
    params(5.0, 0.5, 5.0, 0.5, 0.0, 0.0)
}

/// Strong saturation of the first species with `λ_1 < a < a_0`.
pub fn multiplicity_panel() -> ModelParams {
    params(4.0, 1.0, 5.0, 1.0, 1e4, 0.0)
}

/// Equal rates, `β = 0`; `α` is scanned.
pub fn saturation_panel() -> ModelParams {
    params(5.0, 1.0, 5.0, 1.0, 0.0, 0.0)
}

/// Weak competition on the resident; the a-branch is followed.
pub fn a_branch_panel() -> ModelParams {
    params(4.0, 2.0, 5.0, 1e-3, 0.0, 0.5)
}

/// Cases `(branch, params)` with both signs of the stability indicator.
pub fn dichotomy_panel() -> Vec<(BranchKind, ModelParams)> {
    let mut cases = Vec::new();
    for alpha in [0.0, 0.2, 1.0] {
        cases.push((BranchKind::A, a_branch_panel().with_alpha(alpha)));
    }
    for beta in [0.0, 0.3, 1.5] {
        cases.push((BranchKind::C, params(5.0, 1e-3, 4.0, 1.5, 0.3, beta)));
    }
    cases
}

/// Smooth random potential with values of either sign.
pub fn random_potential(grid: &Grid, rng: &mut ChaCha8Rng, amp: f64) -> ScalarField {
    let lengths = grid.lengths();
    let modes: Vec<(f64, f64, f64)> = (1..=4)
        .map(|_| {
            (
                rng.random_range(-amp..amp),
                rng.random_range(0.0..PI),
                rng.random_range(0.0..PI),
            )
        })
        .collect();
    let offset = rng.random_range(-amp..amp);
    let lx = lengths[0];
    let ly = lengths.get(1).copied().unwrap_or(1.0);
    ScalarField::from_fn(*grid, |x, y| {
        offset
            + modes
                .iter()
                .enumerate()
                .map(|(k, (c, px, py))| {
                    let k = (k + 1) as f64;
                    c * (k * PI * x / lx + px).sin() * (k * PI * y / ly + py).cos()
                })
                .sum::<f64>()
    })
    .expect("finite potential")
}

fn recipe_bounds(cfg: &Config, grid: &Grid) -> CliResult<(String, Vec<Check>)> {
    let panels = match cfg.params {
        Some(p) => vec![p],
        None => vec![
            symmetric_panel(),
            multiplicity_panel(),
            params(6.0, 0.5, 5.0, 0.8, 0.3, 0.1),
        ],
    };
    let mut records = 0usize;
    let (mut over_rate, mut over_theta) = (0usize, 0usize);
    let mut worst = f64::NEG_INFINITY;
    for p in panels {
        let seeds = default_seeds(grid, &p, cfg.seed)?;
        let theta_a = solve_logistic(grid, p.a)?;
        let theta_c = solve_logistic(grid, p.c)?;
        for r in deflated_solve(&p, &seeds, &cfg.solver.solve_deflation())? {
            if !r.is_nonnegative() {
                continue;
            }
            records += 1;
            let gap_rate = (r.state.u.max() - p.a).max(r.state.v.max() - p.c);
            worst = worst.max(gap_rate);
            if gap_rate > 1e-8 {
                over_rate += 1;
            }
            let gap_theta = |w: &ScalarField, t: &ScalarField| {
                w.values().iter().zip(t.values()).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max)
            };
            if gap_theta(&r.state.u, &theta_a) > 1e-6 || gap_theta(&r.state.v, &theta_c) > 1e-6 {
                over_theta += 1;
            }
        }
    }
    Ok((
        "non-negative steady states satisfy u ≤ θ_a ≤ a and v ≤ θ_c ≤ c".into(),
        vec![
            Check::at_least("records checked", records as f64, 1.0),
            Check::at_most("records above the rate bound", over_rate as f64, 0.0)
                .with_note(format!("largest max(u - a, v - c) = {worst:.3e}")),
            Check::at_most("records above the logistic bound", over_theta as f64, 0.0),
        ],
    ))
}

fn recipe_radius(cfg: &Config, grid: &Grid) -> CliResult<(String, Vec<Check>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut compared, mut mismatched) = (0usize, 0usize);
    for _ in 0..cfg.verify.random_potentials {
        let q = random_potential(grid, &mut rng, 3.0);
        let lambda = principal_eigenvalue(grid, &q)?;
        if lambda.abs() < 1e-6 {
            continue;
        }
        let r = spectral_radius_indicator(grid, &q, admissible_m(&q, lambda))?;
        compared += 1;
        if (lambda > 0.0) != (r < 1.0) {
            mismatched += 1;
        }
    }
    let mut worst = 0.0f64;
    for a in [2.0, 5.0, 10.0] {
        let theta = solve_logistic(grid, a)?;
        let q = theta.map(|t| t - a)?;
        let r = spectral_radius_indicator(grid, &q, admissible_m(&q, 0.0))?;
        worst = worst.max((r - 1.0).abs());
    }
    Ok((
        "sign of λ_1(q) agrees with the sign of 1 - r".into(),
        vec![
            Check::at_least("non-degenerate potentials compared", compared as f64, 1.0),
            Check::at_most("sign mismatches", mismatched as f64, 0.0),
            Check::at_most("|r - 1| at q = θ_a - a", worst, CRITICAL_RADIUS_TOL),
        ],
    ))
}

fn recipe_nonexistence(cfg: &Config, grid: &Grid) -> CliResult<(String, Vec<Check>)> {
    let base = cfg.params.unwrap_or(params(1.0, 1.0, 1.0, 1.0, 0.2, 0.2));
    let low = 0.5 * grid.discrete_lambda1();
    let cells = [(low, low), (low, 3.0), (low, 6.0), (3.0, low), (6.0, low)];
    let mut found = 0usize;
    for (i, &(a, c)) in cells.iter().enumerate() {
        let p = base.with_a(a).with_c(c);
        let seeds = default_seeds(grid, &p, cfg.seed.wrapping_add(i as u64))?;
        found += deflated_solve(&p, &seeds, &cfg.solver.solve_deflation())?
            .iter()
            .filter(|r| r.is_coexistence())
            .count();
    }
    Ok((
        "no coexistence state when a ≤ λ_1 or c ≤ λ_1".into(),
        vec![Check::at_most("coexistence states found", found as f64, 0.0)],
    ))
}

fn recipe_existence(cfg: &Config, workers: Option<usize>) -> CliResult<(String, Vec<Check>)> {
    let mut cfg = cfg.clone();
    if cfg.params.is_none() {
        cfg.params = Some(params(1.0, 1.0, 1.0, 1.0, 0.2, 0.2));
    }
    let cells = run_sweep(&cfg, workers)?;
    let invasion = cells.iter().filter(|c| c.region == Region::MutualInvasion).count();
    let mut checks = vec![Check::at_least("mutual-invasion cells", invasion as f64, 1.0)];
    checks.extend(region_checks(&cells));
    Ok((
        "coexistence when both species invade or neither does".into(),
        checks,
    ))
}

fn recipe_sub_super(cfg: &Config, grid: &Grid) -> CliResult<(String, Vec<Check>)> {
    let base = cfg.params.unwrap_or_else(saturation_panel);
    let eps = cfg.verify.eps;
    let plain = verify_sub_super(grid, &base.with_alpha(0.0), eps)?;
    let scan = alpha_scan(grid, &base, eps, &cfg.verify.alphas)?;
    let largest = scan.reports.last().map(|(_, r)| r);
    let mut checks = vec![
        Check::flag("upper inequalities hold at α = 0", plain.upper_u.holds && plain.upper_v.holds),
        Check::flag(
            "upper inequalities hold for every scanned α",
            scan.reports.iter().all(|(_, r)| r.upper_u.holds && r.upper_v.holds),
        ),
        Check::at_least(
            "violating nodes of the lower inequalities at α = 0",
            (plain.lower_u.violating_nodes.len() + plain.lower_v.violating_nodes.len()) as f64,
            1.0,
        ),
    ];
    match largest {
        Some(r) => checks.push(
            Check::at_most(
                "lower violation on the interior subset at the largest α",
                r.lower_u.compact_max_violation.max(r.lower_v.compact_max_violation),
                coexist_core::steady::INEQUALITY_TOL,
            )
            .with_note(match scan.smallest_passing {
                Some(a) => format!("smallest passing α = {a}"),
                None => "no scanned α passes".into(),
            }),
        ),
        None => checks.push(Check::flag("α scan not empty", false)),
    }
    Ok((
        "(θ_a, θ_c) and (θ_{a-ε}, θ_{c-ε}) bracket a solution for large α".into(),
        checks,
    ))
}

fn recipe_large_alpha_stability(cfg: &Config, grid: &Grid) -> CliResult<(String, Vec<Check>)> {
    let alpha = cfg.verify.alphas.iter().copied().fold(0.0, f64::max);
    let p = cfg.params.unwrap_or_else(saturation_panel).with_alpha(alpha);
    let solved = run_solve(grid, &p, cfg)?;
    let stable = solved
        .iter()
        .filter(|s| s.record.is_coexistence() && s.record.stability == Stability::Stable)
        .count();
    Ok((
        "a linearly stable coexistence state exists for large α".into(),
        vec![Check::at_least("stable coexistence states", stable as f64, 1.0)
            .with_note(format!("α = {alpha}"))],
    ))
}

fn recipe_multiplicity(cfg: &Config, grid: &Grid) -> CliResult<(String, Vec<Check>)> {
    let p = cfg.params.unwrap_or_else(multiplicity_panel);
    let a0 = threshold_a0(grid, &p)?;
    let l1 = grid.discrete_lambda1();
    let solved = run_solve(grid, &p, cfg)?;
    let co: Vec<_> = solved.iter().filter(|s| s.record.is_coexistence()).collect();
    let stable = co.iter().filter(|s| s.record.stability == Stability::Stable).count();
    Ok((
        "two coexistence states for λ_1 < a < a_0 and large α".into(),
        vec![
            Check::flag("λ_1 < a < a_0", l1 < p.a && p.a < a0)
                .with_note(format!("λ_1 = {l1:.6}, a = {}, a_0 = {a0:.6}", p.a)),
            Check::at_least("distinct coexistence states", co.len() as f64, 2.0),
            Check::at_least("stable coexistence states", stable as f64, 1.0),
        ],
    ))
}

/// Ratios `err(s_i)/err(s_j)` over pairs with `s_i ≈ s_j / 2`.
pub fn shape_ratios(branch: &Branch) -> Vec<f64> {
    let errs = branch.shape_errors();
    let mut out = Vec::new();
    for (i, &(si, ei)) in errs.iter().enumerate() {
        for &(sj, ej) in &errs[i + 1..] {
            if (sj / si - 2.0).abs() < 0.1 {
                out.push(ei / ej);
            }
        }
    }
    out
}

/// Extrapolated slope over the points nearest `s_max/4`, `s_max/2`, `s_max`.
pub fn slope_three_point(branch: &Branch, s_max: f64) -> Option<f64> {
    let slopes = branch.slopes();
    let pick = |target: f64| {
        slopes
            .iter()
            .min_by(|x, y| (x.0 - target).abs().total_cmp(&(y.0 - target).abs()))
            .copied()
    };
    let pts: Vec<(f64, f64)> = [0.25, 0.5, 1.0]
        .iter()
        .filter_map(|f| pick(f * s_max))
        .collect();
    if pts.len() < 3 || pts[0].0 == pts[1].0 || pts[1].0 == pts[2].0 {
        return None;
    }
    let (s, q): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    extrapolate_to_zero(&s, &q).ok()
}

fn recipe_expansion(cfg: &Config, grid: &Grid) -> CliResult<(String, Vec<Check>)> {
    let p = cfg.params.unwrap_or_else(a_branch_panel);
    let s_max = cfg.branch.s_max;
    let branch = continue_branch(grid, &p, cfg.branch.which, s_max, cfg.branch.steps)?;
    let quad = branch.data.coeff1;
    let mut checks = vec![Check::flag("branch complete", branch.truncated.is_none())];
    match slope_three_point(&branch, s_max) {
        Some(sl) => checks.push(
            Check::at_most("relative gap between slope and quadrature", ((sl - quad) / quad).abs(), 0.05)
                .with_note(format!("quadrature {quad:.6}, slope {sl:.6}")),
        ),
        None => checks.push(Check::flag("three branch points for the slope", false)),
    }
    let ratios = shape_ratios(&branch);
    checks.push(Check::at_least("halving pairs", ratios.len() as f64, 1.0));
    checks.push(Check::at_most(
        "largest shape-error ratio under halving",
        ratios.iter().copied().fold(0.0, f64::max),
        SHAPE_RATIO_TOL,
    ));
    Ok((
        "first-order expansion of the bifurcating branch".into(),
        checks,
    ))
}

/// Stability verdict and eigenvalue ratio at the last point of a branch.
pub fn dichotomy_checks(label: &str, branch: &Branch) -> Vec<Check> {
    let ind = branch.data.stability_indicator;
    let Some(last) = branch.points.last() else {
        return vec![Check::flag(format!("{label}: branch has points"), false)];
    };
    let mut checks = vec![Check::at_least(
        format!("{label}: |indicator|"),
        ind.abs(),
        INDICATOR_FLOOR,
    )];
    checks.push(
        Check::flag(format!("{label}: stability verdict follows indicator sign"), last.stable == (ind > 0.0))
            .with_note(format!("indicator {ind:.6}, leading μ {:.6e}", last.leading_eig.re)),
    );
    checks.push(Check::at_most(
        format!("{label}: relative gap between μ/s and indicator"),
        ((last.leading_eig.re / last.s - ind) / ind).abs(),
        EIG_RATIO_TOL,
    ));
    checks
}

fn recipe_dichotomy(cfg: &Config, grid: &Grid, which: BranchKind) -> CliResult<(String, Vec<Check>)> {
    let cases: Vec<ModelParams> = match cfg.params {
        Some(p) => vec![p],
        None => dichotomy_panel()
            .into_iter()
            .filter(|(w, _)| *w == which)
            .map(|(_, p)| p)
            .collect(),
    };
    let mut checks = Vec::new();
    for (i, p) in cases.iter().enumerate() {
        let branch = continue_branch(grid, p, which, cfg.branch.s_max, cfg.branch.steps)?;
        checks.extend(dichotomy_checks(&format!("case {i}"), &branch));
    }
    let tag = match which {
        BranchKind::A => "a",
        BranchKind::C => "c",
    };
    Ok((
        format!("the indicator sign decides stability on the {tag}-branch"),
        checks,
    ))
}

pub fn run_verify(cfg: &Config, id: &str, workers: Option<usize>) -> CliResult<VerifyReport> {
    let grid = cfg.grid.build()?;
    let (claim, checks) = match id {
        "2.1" => recipe_bounds(cfg, &grid)?,
        "2.3" => recipe_radius(cfg, &grid)?,
        "4.1" => recipe_nonexistence(cfg, &grid)?,
        "4.2" => recipe_existence(cfg, workers)?,
        "5.1" => recipe_sub_super(cfg, &grid)?,
        "5.2" => recipe_large_alpha_stability(cfg, &grid)?,
        "5.3" => recipe_multiplicity(cfg, &grid)?,
        "6.1" => recipe_expansion(cfg, &grid)?,
        "6.2" => recipe_dichotomy(cfg, &grid, BranchKind::A)?,
        "6.3" => recipe_dichotomy(cfg, &grid, BranchKind::C)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown check id {other:?}; expected one of {}",
                CHECK_IDS.join(", ")
            )))
        }
    };
    Ok(VerifyReport {
        id: id.to_string(),
        claim,
        passed: all_passed(&checks),
        checks,
    })
}

/// Runs a recipe and writes `verify_<id>.json` in `dir`.
pub fn cmd_verify(cfg: &Config, dir: &Path, id: &str, workers: Option<usize>) -> CliResult<VerifyReport> {
    let report = run_verify(cfg, id, workers)?;
    ensure_dir(dir)?;
    write_json(&dir.join(format!("verify_{}.json", id.replace('.', "_"))), &report)?;
    Ok(report)
}
