use serde::{Deserialize, Serialize};

use crate::eigen::principal_eigenpair;
use crate::error::{Error, Result};
use crate::grid::{assemble_neg_laplacian, Grid, ScalarField};
use crate::linalg::BandedLu;
use crate::steady::{solve_logistic, ModelParams};

/// Which semi-trivial branch the coexistence states bifurcate from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchKind {
    /// From `(0, θ_c)` as `a` crosses `a_0`; `u` invades.
    A,
    /// From `(θ_a, 0)` as `c` crosses `c_0`; `v` invades.
    C,
}

impl BranchKind {
    pub fn other(self) -> Self {
        match self {
            BranchKind::A => BranchKind::C,
            BranchKind::C => BranchKind::A,
        }
    }

    /// Index of the invading species in the interleaved layout.
    pub(crate) fn invader(self) -> usize {
        match self {
            BranchKind::A => 0,
            BranchKind::C => 1,
        }
    }

    pub(crate) fn with_rate(self, p: &ModelParams, value: f64) -> ModelParams {
        match self {
            BranchKind::A => ModelParams { a: value, ..*p },
            BranchKind::C => ModelParams { c: value, ..*p },
        }
    }
}

/// Local data at a bifurcation point.
///
/// For [`BranchKind::A`] `phi = Φ_a > 0`, `psi = Ψ_a < 0`; for [`BranchKind::C`]
/// `phi = Ψ_c > 0` (the invader) and `psi = Φ_c < 0` (the resident).
#[derive(Debug, Clone)]
pub struct BifurcationData {
    pub which: BranchKind,
    pub threshold: f64,
    /// Positive semi-trivial density of the resident species.
    pub resident: ScalarField,
    pub phi: ScalarField,
    pub psi: ScalarField,
    pub coeff1: f64,
    pub stability_indicator: f64,
}

/// Species-neutral description of one branch: the invader has rate
/// `inv_rate`, saturation `inv_sat` and suffers competition `inv_comp`; the
/// resident has `res_rate`, `res_sat` and `res_comp`.
struct Roles {
    res_rate: f64,
    inv_comp: f64,
    res_comp: f64,
    inv_sat: f64,
    res_sat: f64,
}

fn roles(which: BranchKind, p: &ModelParams) -> Roles {
    match which {
        BranchKind::A => Roles {
            res_rate: p.c,
            inv_comp: p.b,
            res_comp: p.d,
            inv_sat: p.alpha,
            res_sat: p.beta,
        },
        BranchKind::C => Roles {
            res_rate: p.a,
            inv_comp: p.d,
            res_comp: p.b,
            inv_sat: p.beta,
            res_sat: p.alpha,
        },
    }
}

fn resident_state(grid: &Grid, r: &Roles, name: &str) -> Result<ScalarField> {
    if r.res_rate <= grid.discrete_lambda1() + 1e-8 {
        return Err(Error::Precondition(format!(
            "{name} = {} must exceed λ1 = {}",
            r.res_rate,
            grid.discrete_lambda1()
        )));
    }
    solve_logistic(grid, r.res_rate)
}

fn invasion_potential(resident: &ScalarField, r: &Roles) -> Result<ScalarField> {
    resident.map(|t| r.inv_comp * t / (1.0 + r.res_sat * t))
}

fn threshold(grid: &Grid, params: &ModelParams, which: BranchKind) -> Result<f64> {
    params.validate()?;
    let r = roles(which, params);
    let name = if which == BranchKind::A { "c" } else { "a" };
    let resident = resident_state(grid, &r, name)?;
    Ok(principal_eigenpair(grid, &invasion_potential(&resident, &r)?)?.lambda)
}

/// `a_0 = λ_1(bθ_c / (1 + βθ_c))`.
pub fn threshold_a0(grid: &Grid, params: &ModelParams) -> Result<f64> {
    threshold(grid, params, BranchKind::A)
}

/// `c_0 = λ_1(dθ_a / (1 + αθ_a))`.
pub fn threshold_c0(grid: &Grid, params: &ModelParams) -> Result<f64> {
    threshold(grid, params, BranchKind::C)
}

/// Bifurcation data from `(0, θ_c)` at `a = a_0`.
pub fn bifurcation_data_a(grid: &Grid, params: &ModelParams) -> Result<BifurcationData> {
    bifurcation_data(grid, params, BranchKind::A)
}

/// Bifurcation data from `(θ_a, 0)` at `c = c_0`.
pub fn bifurcation_data_c(grid: &Grid, params: &ModelParams) -> Result<BifurcationData> {
    bifurcation_data(grid, params, BranchKind::C)
}

pub fn bifurcation_data(
    grid: &Grid,
    params: &ModelParams,
    which: BranchKind,
) -> Result<BifurcationData> {
    params.validate()?;
    let r = roles(which, params);
    let name = if which == BranchKind::A { "c" } else { "a" };
    let theta = resident_state(grid, &r, name)?;
    let pair = principal_eigenpair(grid, &invasion_potential(&theta, &r)?)?;
    let phi = pair.phi;

    // resident correction: res_comp (-Δ + 2θ - res_rate)^{-1} (-θ/(1+res_sat θ) φ)
    let diag: Vec<f64> = theta.values().iter().map(|t| 2.0 * t - r.res_rate).collect();
    let op = BandedLu::factor(&assemble_neg_laplacian(grid).add_diagonal(&diag))?;
    let rhs: Vec<f64> = theta
        .values()
        .iter()
        .zip(phi.values())
        .map(|(t, p)| -r.res_comp * t / (1.0 + r.res_sat * t) * p)
        .collect();
    let psi = ScalarField::new(*grid, op.solve(&rhs))?;

    let vol = grid.cell_volume();
    let (mut cubic, mut cross, mut saturation, mut weighted) = (0.0, 0.0, 0.0, 0.0);
    for ((&t, &p), &q) in theta.values().iter().zip(phi.values()).zip(psi.values()) {
        let g = 1.0 + r.res_sat * t;
        cubic += p * p * p;
        cross += p * p * q / (g * g);
        saturation += t / g * p * p * p;
        weighted += p * p * p * (1.0 - r.inv_sat * r.inv_comp * t / g);
    }
    let coeff1 = vol * (cubic + r.inv_comp * cross - r.inv_comp * r.inv_sat * saturation);

    Ok(BifurcationData {
        which,
        threshold: pair.lambda,
        resident: theta,
        phi,
        psi,
        coeff1,
        stability_indicator: vol * weighted,
    })
}
