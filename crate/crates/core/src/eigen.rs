//! Principal eigenpairs of `-Δ + q` under zero Dirichlet data and the
//! spectral-radius test that characterizes the sign of `λ_1(q)`.

use crate::error::{Error, Result};
use crate::grid::{assemble_neg_laplacian, Grid, ScalarField};
use crate::linalg::{dot, norm_inf, BandedLu, CsrMatrix};

/// Successive Rayleigh quotients closer than this end the iteration.
pub const RAYLEIGH_TOL: f64 = 1e-11;
/// Required eigen-residual, relative to `max(1, |λ|)`.
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 10_000;
/// Stopping tolerance of the spectral-radius power iteration.
pub const RADIUS_TOL: f64 = 1e-10;

/// Principal eigenvalue `λ_1(q)` with its positive eigenfunction,
/// normalized so that `∫ φ² = 1`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub phi: ScalarField,
}

/// `-Δ + diag(q)` on the grid of `q`.
pub fn schrodinger_operator(q: &ScalarField) -> CsrMatrix {
    assemble_neg_laplacian(q.grid()).add_diagonal(q.values())
}

/// Smallest eigenvalue of `-Δ + q` by inverse iteration on `-Δ + q + σ`
/// with `σ = max(0, -min q) + 1`.
pub fn principal_eigenpair(grid: &Grid, q: &ScalarField) -> Result<EigenPair> {
    if q.grid() != grid {
        return Err(Error::GridMismatch("potential is not on the requested grid".into()));
    }
    let a = schrodinger_operator(q);
    let shift = (-q.min()).max(0.0) + 1.0;
    let shifted = BandedLu::factor(&a.add_diagonal(&vec![shift; grid.len()]))?;
    let w = grid.cell_volume();

    let mut x = vec![1.0; grid.len()];
    normalize(&mut x, w);
    let mut lambda_prev = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        shifted.solve_in_place(&mut x);
        normalize(&mut x, w);
        let ax = a.mul_vec(&x);
        let lambda = dot(&ax, &x) / dot(&x, &x);
        residual = ax
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (p, q)| m.max((p - lambda * q).abs()));
        let settled = (lambda - lambda_prev).abs() < RAYLEIGH_TOL;
        // the residual bound is a postcondition; demand half of it here
        if settled && residual <= 0.5 * RESIDUAL_TOL * lambda.abs().max(1.0) {
            orient_positive(&mut x)?;
            return Ok(EigenPair {
                lambda,
                phi: ScalarField::new(*grid, x)?,
            });
        }
        lambda_prev = lambda;
    }
    Err(Error::Convergence {
        method: "inverse power iteration",
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// `λ_1(q)` only.
pub fn principal_eigenvalue(grid: &Grid, q: &ScalarField) -> Result<f64> {
    principal_eigenpair(grid, q).map(|p| p.lambda)
}

/// Scales `x` so that the quadrature `∫ x² = 1`.
fn normalize(x: &mut [f64], cell_volume: f64) {
    let norm = (cell_volume * dot(x, x)).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

fn orient_positive(x: &mut [f64]) -> Result<()> {
    let peak = x.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if peak < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    match x.iter().position(|&v| v <= 0.0) {
        Some(i) => Err(Error::Spectrum(format!(
            "principal eigenfunction is not positive at node {i} ({})",
            x[i]
        ))),
        None => Ok(()),
    }
}

/// Smallest admissible `M` for [`spectral_radius_indicator`]:
/// `max q + max(1, |λ_1 estimate|)`.
pub fn admissible_m(q: &ScalarField, lambda_estimate: f64) -> f64 {
    q.max() + lambda_estimate.abs().max(1.0)
}

/// Spectral radius of `L = (M - Δ)^{-1} (M - q)`.
///
/// `r < 1`, `r = 1` and `r > 1` correspond to `λ_1(q) > 0`, `= 0` and `< 0`.
/// `L` is self-adjoint for the weighted product `<x, y>_D = xᵀ diag(M - q) y`,
/// so the power iteration uses that Rayleigh quotient. Requires
/// `M ≥ max q + 1`.
pub fn spectral_radius_indicator(grid: &Grid, q: &ScalarField, m: f64) -> Result<f64> {
    if q.grid() != grid {
        return Err(Error::GridMismatch("potential is not on the requested grid".into()));
    }
    if !(m.is_finite() && m >= q.max() + 1.0) {
        return Err(Error::Precondition(format!(
            "M = {m} must be at least max q + 1 = {}",
            q.max() + 1.0
        )));
    }
    let n = grid.len();
    let weight: Vec<f64> = q.values().iter().map(|qi| m - qi).collect();
    let lhs = BandedLu::factor(&assemble_neg_laplacian(grid).add_diagonal(&vec![m; n]))?;
    let apply = |x: &[f64]| {
        let mut y: Vec<f64> = x.iter().zip(&weight).map(|(xi, wi)| xi * wi).collect();
        lhs.solve_in_place(&mut y);
        y
    };
    let weighted = |x: &[f64], y: &[f64]| -> f64 {
        x.iter().zip(y).zip(&weight).map(|((a, b), w)| a * b * w).sum()
    };

    let mut x = vec![1.0; n];
    let mut r_prev = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let y = apply(&x);
        let r = weighted(&y, &x) / weighted(&x, &x);
        let scale = norm_inf(&y);
        x = y.into_iter().map(|v| v / scale).collect();
        if (r - r_prev).abs() < RADIUS_TOL {
            return Ok(r);
        }
        r_prev = r;
    }
    Err(Error::Convergence {
        method: "spectral radius power iteration",
        iterations: MAX_ITERATIONS,
        residual: f64::NAN,
    })
}
