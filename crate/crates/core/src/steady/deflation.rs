use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{Grid, ScalarField};

use super::logistic::solve_logistic;
use super::model::ModelParams;
use super::newton::{damped_newton, record_from, Deflation, NewtonOptions, SolutionRecord};
use super::state::StateVector;
use super::system::CompetitionSystem;

/// Two records are the same solution unless their nodewise max difference
/// exceeds this.
pub const DISTINCT_TOL: f64 = 1e-6;
/// Number of random perturbation seeds in [`default_seeds`].
pub const RANDOM_SEEDS: usize = 8;

const LOG_EPS_MIN: f64 = -7.0;
const LOG_EPS_MAX: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeflationOptions {
    pub newton: NewtonOptions,
    /// Cap on deflated Newton runs across all seeds; `None` means one run per
    /// seed plus one retry after every new root.
    pub max_attempts: Option<usize>,
}

fn unit_bump(grid: &Grid) -> ScalarField {
    let l = grid.lengths();
    let g = *grid;
    match l.as_slice() {
        [lx] => ScalarField::from_fn(g, |x, _| (std::f64::consts::PI * x / lx).sin()),
        [lx, ly] => ScalarField::from_fn(g, |x, y| {
            (std::f64::consts::PI * x / lx).sin() * (std::f64::consts::PI * y / ly).sin()
        }),
        _ => unreachable!("grids are one or two dimensional"),
    }
    .expect("sine profile is finite")
}

/// Seeds `(θ_a, θ_c)`, `(θ_a/2, θ_c/2)` and [`RANDOM_SEEDS`] perturbations of
/// the semi-trivial states.
///
/// Perturbation `k` puts a small invading population `ε·rate·φ̂·noise` on top
/// of the resident semi-trivial state, alternating which species invades.
/// `ε` is log-uniform on `[1e-7, 1e-1]`, stratified into equal bands per
/// invader; `noise` is nodewise uniform on `[0.75, 1.25]`. Tiny invaders
/// reach states that bifurcate from the semi-trivial branches.
pub fn default_seeds(grid: &Grid, params: &ModelParams, seed: u64) -> Result<Vec<StateVector>> {
    params.validate()?;
    let theta_a = solve_logistic(grid, params.a)?;
    let theta_c = solve_logistic(grid, params.c)?;
    let bump = unit_bump(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds = vec![
        StateVector::new(theta_a.clone(), theta_c.clone())?,
        StateVector::new(theta_a.scale(0.5), theta_c.scale(0.5))?,
    ];
    let per_family = RANDOM_SEEDS.div_ceil(2);
    let width = (LOG_EPS_MAX - LOG_EPS_MIN) / per_family as f64;
    for k in 0..RANDOM_SEEDS {
        let stratum = (k / 2) as f64;
        let log_eps = LOG_EPS_MIN + width * (stratum + rng.random::<f64>());
        let eps = 10f64.powf(log_eps);
        let invade_u = k % 2 == 0;
        let rate = if invade_u { params.a } else { params.c };
        let noise: Vec<f64> = bump
            .values()
            .iter()
            .map(|&b| eps * rate * b * rng.random_range(0.75..1.25))
            .collect();
        let invader = ScalarField::new(*grid, noise)?;
        seeds.push(if invade_u {
            StateVector::new(invader, theta_c.clone())?
        } else {
            StateVector::new(theta_a.clone(), invader)?
        });
    }
    Ok(seeds)
}

/// Deflated Newton search for all steady states reachable from `seeds`.
///
/// The trivial state and whichever semi-trivial states exist are registered
/// as known roots first and appear at the front of the result. Each seed is
/// rerun after every new root it yields; a failed run ends that seed.
pub fn deflated_solve(
    params: &ModelParams,
    seeds: &[StateVector],
    opts: &DeflationOptions,
) -> Result<Vec<SolutionRecord>> {
    let Some(first) = seeds.first() else {
        return Err(crate::Error::Precondition("seed list is empty".into()));
    };
    let grid = *first.grid();
    for s in seeds {
        s.check_grid(&grid)?;
    }
    let sys = CompetitionSystem::new(grid, *params)?;
    let weight = grid.cell_volume();

    let zero = ScalarField::zeros(grid);
    let theta_a = solve_logistic(&grid, params.a)?;
    let theta_c = solve_logistic(&grid, params.c)?;
    let mut candidates = vec![StateVector::new(zero.clone(), zero.clone())?];
    if theta_a.max() > 0.0 {
        candidates.push(StateVector::new(theta_a, zero.clone())?);
    }
    if theta_c.max() > 0.0 {
        candidates.push(StateVector::new(zero, theta_c)?);
    }

    let mut records: Vec<SolutionRecord> = Vec::new();
    let mut roots: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        let x = c.interleaved();
        if let Ok(out) = damped_newton(
            x,
            |x| sys.residual(x),
            |x| sys.jacobian(x),
            &opts.newton,
            &Deflation::none(),
        ) {
            roots.push(out.x.clone());
            records.push(record_from(&sys, out)?);
        }
    }

    let mut attempts = 0usize;
    'seeds: for s in seeds {
        let x0: Vec<f64> = s.interleaved().into_iter().map(|v| v.max(0.0)).collect();
        loop {
            if opts.max_attempts.is_some_and(|cap| attempts >= cap) {
                break 'seeds;
            }
            attempts += 1;
            let deflation = Deflation {
                roots: &roots,
                weight,
            };
            let Ok(out) = damped_newton(
                x0.clone(),
                |x| sys.residual(x),
                |x| sys.jacobian(x),
                &opts.newton,
                &deflation,
            ) else {
                break;
            };
            let novel = roots.iter().all(|r| {
                r.iter()
                    .zip(&out.x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    > DISTINCT_TOL
            });
            if !novel {
                break;
            }
            roots.push(out.x.clone());
            records.push(record_from(&sys, out)?);
        }
    }
    Ok(records)
}
