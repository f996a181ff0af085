use crate::eigen::principal_eigenpair;
use crate::error::{Error, Result};
use crate::grid::{assemble_neg_laplacian, Grid, ScalarField};

use super::newton::{damped_newton, Deflation, NewtonOptions};

/// Residual threshold of the logistic solve.
pub const LOGISTIC_TOL: f64 = 1e-10;

/// Positive solution `θ_rate` of `-Δw = w(rate - w)`, `w = 0` on the boundary.
///
/// Returns the zero field when `rate ≤ λ_1(0) + 1e-8`, where no positive
/// solution exists. Otherwise runs damped Newton from
/// `rate * φ_1 / max φ_1`.
pub fn solve_logistic(grid: &Grid, rate: f64) -> Result<ScalarField> {
    if !rate.is_finite() {
        return Err(Error::Precondition(format!("rate must be finite, got {rate}")));
    }
    if rate <= grid.discrete_lambda1() + 1e-8 {
        return Ok(ScalarField::zeros(*grid));
    }
    let lap = assemble_neg_laplacian(grid);
    let mode = principal_eigenpair(grid, &ScalarField::zeros(*grid))?.phi;
    let peak = mode.max();
    let x0: Vec<f64> = mode.values().iter().map(|p| rate * p / peak).collect();
    let opts = NewtonOptions {
        tol: LOGISTIC_TOL,
        ..Default::default()
    };
    let out = damped_newton(
        x0,
        |w| {
            lap.mul_vec(w)
                .iter()
                .zip(w)
                .map(|(lw, wi)| lw - wi * (rate - wi))
                .collect()
        },
        |w| {
            let d: Vec<f64> = w.iter().map(|wi| 2.0 * wi - rate).collect();
            lap.add_diagonal(&d)
        },
        &opts,
        &Deflation::none(),
    )?;
    let theta = ScalarField::new(*grid, out.x)?;
    if theta.min() <= 0.0 || theta.max() > rate {
        return Err(Error::Inadmissible(format!(
            "logistic solve left (0, rate]: min {}, max {}",
            theta.min(),
            theta.max()
        )));
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::principal_eigenvalue;
    use std::f64::consts::PI;

    /// Shooting oracle for `-w'' = w(r - w)` on `(0, π)`: RK4 from
    /// `w(0) = 0, w'(0) = p` with bisection on `p` so that `w(π) = 0` with
    /// `w > 0` inside. The step divides the grid spacing, so every interior
    /// node is an RK step.
    fn shooting(rate: f64, n: usize) -> Vec<f64> {
        let per_cell = 100;
        let steps = (n + 1) * per_cell;
        let h = PI / steps as f64;
        // returns the trajectory and whether p is below the target slope
        let trajectory = |p: f64| -> (Vec<f64>, bool) {
            let rhs = |w: f64, dw: f64| (dw, -w * (rate - w));
            let (mut w, mut dw) = (0.0f64, p);
            let mut out = Vec::with_capacity(steps + 1);
            out.push(0.0);
            for k in 0..steps {
                let (k1w, k1d) = rhs(w, dw);
                let (k2w, k2d) = rhs(w + 0.5 * h * k1w, dw + 0.5 * h * k1d);
                let (k3w, k3d) = rhs(w + 0.5 * h * k2w, dw + 0.5 * h * k2d);
                let (k4w, k4d) = rhs(w + h * k3w, dw + h * k3d);
                w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
                dw += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
                if w <= 0.0 && k + 1 < steps - per_cell {
                    return (out, true);
                }
                if !w.is_finite() || w > 10.0 * rate {
                    return (out, false);
                }
                out.push(w);
            }
            let low = out[steps] < 0.0;
            (out, low)
        };
        let (mut lo, mut hi) = (1e-3, 40.0);
        while hi - lo > 1e-14 * hi {
            let mid = 0.5 * (lo + hi);
            if trajectory(mid).1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (w, _) = trajectory(hi);
        assert_eq!(w.len(), steps + 1, "oracle trajectory truncated");
        assert!(w[steps].abs() < 1e-9, "oracle misses the right endpoint");
        (1..=n).map(|i| w[i * per_cell]).collect()
    }

    #[test]
    fn subcritical_rate_gives_zero() {
        let g = Grid::interval(PI, 100).unwrap();
        assert_eq!(solve_logistic(&g, 0.5).unwrap(), ScalarField::zeros(g));
        let at_threshold = solve_logistic(&g, g.discrete_lambda1()).unwrap();
        assert_eq!(at_threshold, ScalarField::zeros(g));
    }

    #[test]
    fn supercritical_rate_bounded_by_rate() {
        let g = Grid::interval(PI, 200).unwrap();
        let t = solve_logistic(&g, 5.0).unwrap();
        assert!(t.min() > 0.0 && t.max() <= 5.0);
        let r = Grid::rectangle(PI, PI, 20, 24).unwrap();
        let t2 = solve_logistic(&r, 6.0).unwrap();
        assert!(t2.min() > 0.0 && t2.max() <= 6.0);
    }

    #[test]
    fn barely_supercritical_rate_converges() {
        let g = Grid::interval(PI, 200).unwrap();
        let t = solve_logistic(&g, g.discrete_lambda1() + 1e-3).unwrap();
        assert!(t.min() > 0.0 && t.max() < 1e-2);
    }

    #[test]
    fn linearization_at_theta_is_critical() {
        let g = Grid::interval(PI, 200).unwrap();
        for factor in [2.0, 5.0, 10.0] {
            let a = factor * g.discrete_lambda1();
            let t = solve_logistic(&g, a).unwrap();
            let lam = principal_eigenvalue(&g, &t.map(|v| v - a).unwrap()).unwrap();
            assert!(lam.abs() < 5e-6, "a = {a}: λ_1(θ_a - a) = {lam}");
        }
    }

    #[test]
    fn monotone_in_rate() {
        let g = Grid::interval(PI, 200).unwrap();
        let thetas: Vec<_> = [2.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|&a| solve_logistic(&g, a).unwrap())
            .collect();
        for pair in thetas.windows(2) {
            for (lo, hi) in pair[0].values().iter().zip(pair[1].values()) {
                assert!(lo <= hi);
            }
        }
    }

    #[test]
    fn matches_shooting_oracle() {
        let g = Grid::interval(PI, 200).unwrap();
        let t = solve_logistic(&g, 5.0).unwrap();
        let oracle = shooting(5.0, g.len());
        let err = t
            .values()
            .iter()
            .zip(&oracle)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-4, "max nodal error {err:.3e}");
    }

    #[test]
    fn shooting_error_is_second_order() {
        let err = |n: usize| {
            let g = Grid::interval(PI, n).unwrap();
            let t = solve_logistic(&g, 5.0).unwrap();
            t.values()
                .iter()
                .zip(shooting(5.0, n))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let (coarse, fine) = (err(99), err(199));
        let ratio = coarse / fine;
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }
}
