use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, BandedLu, CsrMatrix};

use super::model::ModelParams;
use super::state::StateVector;
use super::system::CompetitionSystem;

/// A component whose largest magnitude is at most this is treated as zero.
pub const ABSENT_TOL: f64 = 1e-8;
/// A present component is positive when `min > POS_REL_TOL * max`.
pub const POS_REL_TOL: f64 = 1e-6;

/// Budgets of the damped Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Convergence threshold on the infinity norm of the residual.
    pub tol: f64,
    pub max_iterations: usize,
    /// Step halvings allowed in the Armijo backtracking.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 100,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Trivial,
    SemiTrivialU,
    SemiTrivialV,
    Coexistence,
    /// Some component changes sign or is negative.
    NonPhysical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
    Undetermined,
}

/// A converged steady state with its diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionRecord {
    pub state: StateVector,
    pub params: ModelParams,
    pub residual_norm: f64,
    pub iterations: usize,
    pub classification: Classification,
    pub stability: Stability,
}

impl SolutionRecord {
    pub fn is_coexistence(&self) -> bool {
        self.classification == Classification::Coexistence
    }

    pub fn is_nonnegative(&self) -> bool {
        self.classification != Classification::NonPhysical
    }
}

enum Component {
    Absent,
    Positive,
    Other,
}

fn component(values: &[f64]) -> Component {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mag = max.max(-min);
    if mag <= ABSENT_TOL {
        Component::Absent
    } else if min > POS_REL_TOL * max {
        Component::Positive
    } else {
        Component::Other
    }
}

/// Classifies a state by which components are absent or strictly positive.
pub fn classify(state: &StateVector) -> Classification {
    match (component(state.u.values()), component(state.v.values())) {
        (Component::Absent, Component::Absent) => Classification::Trivial,
        (Component::Positive, Component::Absent) => Classification::SemiTrivialU,
        (Component::Absent, Component::Positive) => Classification::SemiTrivialV,
        (Component::Positive, Component::Positive) => Classification::Coexistence,
        _ => Classification::NonPhysical,
    }
}

/// Damped Newton on the competition system from `initial`.
///
/// Negative entries of the initial guess are clipped to zero; iterates are
/// never clipped. Steps are halved (Armijo rule on the residual infinity
/// norm) up to `max_halvings` times.
pub fn newton_solve(
    initial: &StateVector,
    params: &ModelParams,
    opts: &NewtonOptions,
) -> Result<SolutionRecord> {
    let sys = CompetitionSystem::new(*initial.grid(), *params)?;
    StateVector::new(initial.u.clone(), initial.v.clone())?;
    let x0: Vec<f64> = initial.interleaved().into_iter().map(|v| v.max(0.0)).collect();
    let out = damped_newton(
        x0,
        |x| sys.residual(x),
        |x| sys.jacobian(x),
        opts,
        &Deflation::none(),
    )?;
    record_from(&sys, out)
}

pub(crate) fn record_from(sys: &CompetitionSystem, out: NewtonOutcome) -> Result<SolutionRecord> {
    let state = StateVector::from_interleaved(*sys.grid(), &out.x)?;
    Ok(SolutionRecord {
        classification: classify(&state),
        state,
        params: *sys.params(),
        residual_norm: out.residual,
        iterations: out.iterations,
        stability: Stability::Undetermined,
    })
}

pub(crate) struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Shifted-power deflation `M(x) = Π_k (1 / ‖x - x_k‖² + 1)` over known
/// roots, with the quadrature-weighted Euclidean norm.
pub(crate) struct Deflation<'a> {
    pub roots: &'a [Vec<f64>],
    pub weight: f64,
}

impl<'a> Deflation<'a> {
    pub fn none() -> Self {
        Self {
            roots: &[],
            weight: 1.0,
        }
    }

    fn factor(&self, x: &[f64]) -> f64 {
        self.roots
            .iter()
            .map(|r| 1.0 / self.dist2(x, r) + 1.0)
            .product()
    }

    fn dist2(&self, x: &[f64], r: &[f64]) -> f64 {
        self.weight * x.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    }

    /// `(∇M · δ) / M`.
    fn log_derivative(&self, x: &[f64], step: &[f64]) -> f64 {
        self.roots
            .iter()
            .map(|r| {
                let d2 = self.dist2(x, r);
                let diff: Vec<f64> = x.iter().zip(r).map(|(a, b)| a - b).collect();
                let dm = -2.0 * self.weight * dot(&diff, step) / (d2 * d2);
                dm / (1.0 / d2 + 1.0)
            })
            .sum()
    }
}

pub(crate) fn damped_newton(
    mut x: Vec<f64>,
    residual: impl Fn(&[f64]) -> Vec<f64>,
    jacobian: impl Fn(&[f64]) -> CsrMatrix,
    opts: &NewtonOptions,
    deflation: &Deflation<'_>,
) -> Result<NewtonOutcome> {
    let mut history = Vec::new();
    let mut f = residual(&x);
    for iteration in 0..=opts.max_iterations {
        let fnorm = norm_inf(&f);
        history.push(fnorm);
        if !fnorm.is_finite() {
            return Err(Error::Divergence {
                method: "newton",
                history,
            });
        }
        if fnorm < opts.tol {
            return Ok(NewtonOutcome {
                x,
                iterations: iteration,
                residual: fnorm,
            });
        }
        if iteration == opts.max_iterations {
            break;
        }
        let lu = BandedLu::factor(&jacobian(&x))?;
        let mut step = lu.solve(&f);
        step.iter_mut().for_each(|s| *s = -*s);
        if !deflation.roots.is_empty() {
            let denom = 1.0 - deflation.log_derivative(&x, &step);
            if denom.abs() > 1e-12 {
                step.iter_mut().for_each(|s| *s /= denom);
            }
        }
        let merit0 = deflation.factor(&x) * fnorm;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let ft = residual(&trial);
            let merit = deflation.factor(&trial) * norm_inf(&ft);
            if merit.is_finite() && merit <= (1.0 - 1e-4 * t) * merit0 {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, ft)) => {
                x = trial;
                f = ft;
            }
            None => {
                return Err(Error::Divergence {
                    method: "newton line search",
                    history,
                })
            }
        }
    }
    Err(Error::Convergence {
        method: "newton",
        iterations: opts.max_iterations,
        residual: *history.last().unwrap_or(&f64::NAN),
    })
}
