use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{assemble_neg_laplacian, Grid, ScalarField};

use super::logistic::solve_logistic;
use super::model::ModelParams;

/// Tolerance on the sign of each inequality residual.
pub const INEQUALITY_TOL: f64 = 1e-8;
/// Interior cut: a node belongs to `Ω′` when both subsolution components
/// exceed this fraction of their maximum there.
pub const COMPACT_FRACTION: f64 = 0.1;

/// One inequality evaluated nodewise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    /// Largest signed violation over the whole grid (≤ 0 means it holds).
    pub max_violation: f64,
    /// Nodes where the violation exceeds [`INEQUALITY_TOL`].
    pub violating_nodes: Vec<usize>,
    /// Largest violation restricted to `Ω′`.
    pub compact_max_violation: f64,
    pub holds: bool,
    pub holds_on_compact: bool,
}

impl InequalityReport {
    fn from_violation(violation: &[f64], compact: &[bool]) -> Self {
        let max_violation = violation.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let compact_max_violation = violation
            .iter()
            .zip(compact)
            .filter(|(_, &c)| c)
            .map(|(&v, _)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let violating_nodes = violation
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > INEQUALITY_TOL)
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        Self {
            max_violation,
            holds: violating_nodes.is_empty(),
            violating_nodes,
            holds_on_compact: compact_max_violation <= INEQUALITY_TOL,
            compact_max_violation,
        }
    }
}

/// The four inequalities for the pair `Ū = (θ_a, θ_c)`, `U̲ = (θ_{a-ε}, θ_{c-ε})`.
///
/// `upper_u`, `upper_v` are the supersolution inequalities
/// `Δū + ū(a - ū - b v̲ f(ū, v̲)) ≤ 0` and its mirror; `lower_u`, `lower_v` the
/// subsolution ones `Δu̲ + u̲(a - u̲ - b v̄ f(u̲, v̄)) ≥ 0` and its mirror.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubSuperReport {
    pub params: ModelParams,
    pub eps: f64,
    pub upper_u: InequalityReport,
    pub upper_v: InequalityReport,
    pub lower_u: InequalityReport,
    pub lower_v: InequalityReport,
    pub compact_nodes: usize,
}

impl SubSuperReport {
    /// All four inequalities hold on the whole grid.
    pub fn holds_everywhere(&self) -> bool {
        self.upper_u.holds && self.upper_v.holds && self.lower_u.holds && self.lower_v.holds
    }

    /// Upper inequalities hold everywhere and lower ones on `Ω′`.
    pub fn holds_on_compact(&self) -> bool {
        self.upper_u.holds
            && self.upper_v.holds
            && self.lower_u.holds_on_compact
            && self.lower_v.holds_on_compact
    }
}

/// Evaluates the ordered pair built from logistic states.
pub fn verify_sub_super(grid: &Grid, params: &ModelParams, eps: f64) -> Result<SubSuperReport> {
    params.validate()?;
    let lambda1 = grid.discrete_lambda1();
    let bound = (params.a - lambda1).min(params.c - lambda1);
    if !(eps > 0.0 && eps < bound) {
        return Err(Error::Precondition(format!(
            "eps = {eps} must lie in (0, {bound}) = (0, min(a, c) - λ1)"
        )));
    }
    let ua = solve_logistic(grid, params.a)?;
    let vc = solve_logistic(grid, params.c)?;
    let ul = solve_logistic(grid, params.a - eps)?;
    let vl = solve_logistic(grid, params.c - eps)?;
    let lap = assemble_neg_laplacian(grid);
    let lap_of = |w: &ScalarField| lap.mul_vec(w.values());
    let (lua, lvc, lul, lvl) = (lap_of(&ua), lap_of(&vc), lap_of(&ul), lap_of(&vl));

    let (umax, vmax) = (ul.max(), vl.max());
    let compact: Vec<bool> = ul
        .values()
        .iter()
        .zip(vl.values())
        .map(|(&u, &v)| u > COMPACT_FRACTION * umax && v > COMPACT_FRACTION * vmax)
        .collect();

    let p = params;
    let n = grid.len();
    let (mut r1, mut r2, mut r3, mut r4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let (uo, vo, uu, vu) = (ua.values()[i], vc.values()[i], ul.values()[i], vl.values()[i]);
        r1[i] = -lua[i] + uo * (p.a - uo - p.b * vu * p.response(uo, vu));
        r2[i] = -lvc[i] + vo * (p.c - vo - p.d * uu * p.response(uu, vo));
        r3[i] = -(-lul[i] + uu * (p.a - uu - p.b * vo * p.response(uu, vo)));
        r4[i] = -(-lvl[i] + vu * (p.c - vu - p.d * uo * p.response(uo, vu)));
    }
    Ok(SubSuperReport {
        params: *params,
        eps,
        upper_u: InequalityReport::from_violation(&r1, &compact),
        upper_v: InequalityReport::from_violation(&r2, &compact),
        lower_u: InequalityReport::from_violation(&r3, &compact),
        lower_v: InequalityReport::from_violation(&r4, &compact),
        compact_nodes: compact.iter().filter(|&&c| c).count(),
    })
}

/// Result of [`alpha_scan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaScan {
    pub reports: Vec<(f64, SubSuperReport)>,
    /// Smallest scanned `α` whose report holds on `Ω′`.
    pub smallest_passing: Option<f64>,
}

/// [`verify_sub_super`] over increasing values of `α`.
pub fn alpha_scan(
    grid: &Grid,
    params: &ModelParams,
    eps: f64,
    alphas: &[f64],
) -> Result<AlphaScan> {
    let mut reports = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        reports.push((alpha, verify_sub_super(grid, &params.with_alpha(alpha), eps)?));
    }
    let smallest_passing = reports
        .iter()
        .filter(|(_, r)| r.holds_on_compact())
        .map(|(a, _)| *a)
        .fold(None, |acc: Option<f64>, a| Some(acc.map_or(a, |m| m.min(a))));
    Ok(AlphaScan {
        reports,
        smallest_passing,
    })
}
