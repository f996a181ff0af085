use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::linalg::{dot, norm_inf, BandedLu};
use crate::steady::{CompetitionSystem, ModelParams, Stability, StateVector};

use super::data::{bifurcation_data, BifurcationData, BranchKind};
use super::spectrum::{assess_stability, linearized_spectrum, STABILITY_EIGS};

/// Residual threshold of the extended-system corrector.
pub const CORRECTOR_TOL: f64 = 1e-10;
pub const CORRECTOR_MAX_ITERATIONS: usize = 30;
/// Largest admissible `s_max`.
pub const S_MAX_CAP: f64 = 0.5;
pub const MIN_STEPS: usize = 4;

/// One corrected point of a bifurcating branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    /// Projection `∫ w φ` of the invading density on the critical mode.
    pub s: f64,
    /// `a(s)` on the a-branch, `c(s)` on the c-branch.
    pub param_value: f64,
    pub state: StateVector,
    /// Eigenvalue of smallest real part.
    pub leading_eig: Complex64,
    pub stable: bool,
}

/// Result of [`continue_branch`].
#[derive(Debug, Clone)]
pub struct Branch {
    pub data: BifurcationData,
    /// Parameters with the bifurcation rate left at its input value.
    pub params: ModelParams,
    pub points: Vec<BranchPoint>,
    /// Why continuation stopped early, if it did.
    pub truncated: Option<String>,
}

impl Branch {
    pub fn params_at(&self, point: &BranchPoint) -> ModelParams {
        self.data.which.with_rate(&self.params, point.param_value)
    }

    /// Difference quotients `(p(s) - p_0) / s`.
    pub fn slopes(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.s, (p.param_value - self.data.threshold) / p.s))
            .collect()
    }

    /// `‖w(s)/s - φ‖_∞` for the invading density `w`.
    pub fn shape_errors(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| {
                let w = invader_field(&p.state, self.data.which);
                let err = w
                    .values()
                    .iter()
                    .zip(self.data.phi.values())
                    .map(|(x, f)| (x / p.s - f).abs())
                    .fold(0.0, f64::max);
                (p.s, err)
            })
            .collect()
    }
}

fn invader_field(state: &StateVector, which: BranchKind) -> &ScalarField {
    match which {
        BranchKind::A => &state.u,
        BranchKind::C => &state.v,
    }
}

/// Value at zero of the polynomial through `(xs, ys)` (Neville).
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Precondition("need matching, nonempty samples".into()));
    }
    let mut p = ys.to_vec();
    for level in 1..xs.len() {
        for i in 0..xs.len() - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            if xi == xj {
                return Err(Error::Precondition("repeated abscissa".into()));
            }
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    Ok(p[0])
}

/// Extended unknown `(x, p)` with the weighted inner product
/// `vol·Σ x·y + p·q`.
#[derive(Clone)]
struct Point {
    x: Vec<f64>,
    p: f64,
}

struct Corrector<'a> {
    sys: CompetitionSystem,
    base: ModelParams,
    which: BranchKind,
    vol: f64,
    tangent: &'a Point,
    anchor: &'a Point,
}

impl Corrector<'_> {
    fn residual(&mut self, y: &Point) -> (Vec<f64>, f64) {
        self.sys.set_params(self.which.with_rate(&self.base, y.p));
        let f = self.sys.residual(&y.x);
        let dx: Vec<f64> = y.x.iter().zip(&self.anchor.x).map(|(a, b)| a - b).collect();
        let g = self.vol * dot(&self.tangent.x, &dx) + self.tangent.p * (y.p - self.anchor.p);
        (f, g)
    }

    /// Newton step of the bordered system
    /// `[J F_p; vol·t_xᵀ t_p] (δx, δp) = -(F, g)` with one refinement pass.
    fn step(&mut self, y: &Point, f: &[f64], g: f64) -> Result<Point> {
        self.sys.set_params(self.which.with_rate(&self.base, y.p));
        let jac = self.sys.jacobian(&y.x);
        let lu = BandedLu::factor(&jac)?;
        let inv = self.which.invader();
        let fp: Vec<f64> = (0..y.x.len())
            .map(|i| if i % 2 == inv { -y.x[i] } else { 0.0 })
            .collect();
        let z2 = lu.solve(&fp);
        let t = self.tangent;
        let denom = t.p - self.vol * dot(&t.x, &z2);
        let solve = |rhs_f: &[f64], rhs_g: f64| -> (Vec<f64>, f64) {
            let z1 = lu.solve(rhs_f);
            let dp = (rhs_g - self.vol * dot(&t.x, &z1)) / denom;
            let dx = z1.iter().zip(&z2).map(|(a, b)| a - dp * b).collect();
            (dx, dp)
        };
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let (mut dx, mut dp) = solve(&neg_f, -g);
        let jdx = jac.mul_vec(&dx);
        let r_f: Vec<f64> = (0..dx.len()).map(|i| neg_f[i] - jdx[i] - fp[i] * dp).collect();
        let r_g = -g - self.vol * dot(&t.x, &dx) - t.p * dp;
        let (cx, cp) = solve(&r_f, r_g);
        dx.iter_mut().zip(&cx).for_each(|(a, b)| *a += b);
        dp += cp;
        Ok(Point { x: dx, p: dp })
    }

    fn solve(&mut self, predictor: Point) -> Result<Point> {
        let mut y = predictor;
        let (mut f, mut g) = self.residual(&y);
        let mut history = Vec::new();
        for _ in 0..CORRECTOR_MAX_ITERATIONS {
            let merit = norm_inf(&f).max(g.abs());
            history.push(merit);
            if !merit.is_finite() {
                break;
            }
            if norm_inf(&f) < CORRECTOR_TOL && g.abs() < CORRECTOR_TOL {
                return Ok(y);
            }
            let d = self.step(&y, &f, g)?;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=30 {
                let trial = Point {
                    x: y.x.iter().zip(&d.x).map(|(a, b)| a + t * b).collect(),
                    p: y.p + t * d.p,
                };
                let (ft, gt) = self.residual(&trial);
                let mt = norm_inf(&ft).max(gt.abs());
                if mt.is_finite() && mt <= (1.0 - 1e-4 * t) * merit {
                    (y, f, g) = (trial, ft, gt);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(Error::Divergence {
                    method: "arclength corrector",
                    history,
                });
            }
        }
        Err(Error::Convergence {
            method: "arclength corrector",
            iterations: CORRECTOR_MAX_ITERATIONS,
            residual: *history.last().unwrap_or(&f64::NAN),
        })
    }
}

/// Pseudo-arclength continuation of the coexistence branch bifurcating from
/// a semi-trivial state, at targets `s_k = k·s_max/steps`, `k = 1..=steps`.
///
/// The first predictor follows the first-order expansion
/// `(s·φ, θ + s·ψ, p_0 + p_1·s)`; later ones follow the secant. Each point
/// is corrected on the state-parameter system with the arclength
/// constraint. A corrector failure truncates the branch and is reported in
/// [`Branch::truncated`].
pub fn continue_branch(
    grid: &Grid,
    params: &ModelParams,
    which: BranchKind,
    s_max: f64,
    steps: usize,
) -> Result<Branch> {
    if !(s_max > 0.0 && s_max <= S_MAX_CAP) {
        return Err(Error::Precondition(format!(
            "s_max = {s_max} must lie in (0, {S_MAX_CAP}]"
        )));
    }
    if steps < MIN_STEPS {
        return Err(Error::Precondition(format!(
            "steps = {steps} must be at least {MIN_STEPS}"
        )));
    }
    let data = bifurcation_data(grid, params, which)?;
    let inv = which.invader();
    let n = grid.len();
    let vol = grid.cell_volume();
    let interleave = |inv_vals: &[f64], res_vals: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; 2 * n];
        for i in 0..n {
            x[2 * i + inv] = inv_vals[i];
            x[2 * i + 1 - inv] = res_vals[i];
        }
        x
    };
    let project = |x: &[f64]| -> f64 {
        vol * (0..n).map(|i| x[2 * i + inv] * data.phi.values()[i]).sum::<f64>()
    };
    let normalized = |mut t: Point| -> Point {
        let nrm = (vol * dot(&t.x, &t.x) + t.p * t.p).sqrt();
        t.x.iter_mut().for_each(|v| *v /= nrm);
        t.p /= nrm;
        t
    };

    let mut prev = Point {
        x: interleave(&vec![0.0; n], data.resident.values()),
        p: data.threshold,
    };
    let mut tangent = normalized(Point {
        x: interleave(data.phi.values(), data.psi.values()),
        p: data.coeff1,
    });
    let mut s_prev = 0.0;
    let mut points: Vec<BranchPoint> = Vec::with_capacity(steps);
    let mut truncated = None;
    let sys = CompetitionSystem::new(*grid, *params)?;

    for k in 1..=steps {
        let s_target = s_max * k as f64 / steps as f64;
        let rate = project(&tangent.x);
        let ds = (s_target - s_prev) / rate;
        let predictor = Point {
            x: prev.x.iter().zip(&tangent.x).map(|(a, t)| a + ds * t).collect(),
            p: prev.p + ds * tangent.p,
        };
        let mut corrector = Corrector {
            sys: sys.clone(),
            base: *params,
            which,
            vol,
            tangent: &tangent,
            anchor: &predictor,
        };
        let y = match corrector.solve(predictor.clone()) {
            Ok(y) => y,
            Err(e) => {
                truncated = Some(format!("corrector failed at s ≈ {s_target}: {e}"));
                break;
            }
        };
        let state = StateVector::from_interleaved(*grid, &y.x)?;
        let point_params = which.with_rate(params, y.p);
        let spectrum = match linearized_spectrum(&state, &point_params, STABILITY_EIGS) {
            Ok(s) => s,
            Err(e) => {
                truncated = Some(format!("spectrum failed at s ≈ {s_target}: {e}"));
                break;
            }
        };
        let s = project(&y.x);
        points.push(BranchPoint {
            s,
            param_value: y.p,
            state,
            leading_eig: spectrum[0],
            stable: assess_stability(&spectrum) == Stability::Stable,
        });
        tangent = normalized(Point {
            x: y.x.iter().zip(&prev.x).map(|(a, b)| a - b).collect(),
            p: y.p - prev.p,
        });
        prev = y;
        s_prev = s;
    }
    Ok(Branch {
        data,
        params: *params,
        points,
        truncated,
    })
}
