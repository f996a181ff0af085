use std::f64::consts::PI;

use approx::assert_abs_diff_eq;

use coexist_core::bifurcation::{assess_record, continue_branch, threshold_a0, threshold_c0, BranchKind};
use coexist_core::eigen::principal_eigenvalue;
use coexist_core::steady::{
    default_seeds, deflated_solve, residual, solve_logistic, ModelParams, Stability, StateVector,
};
use coexist_core::Grid;

fn params(a: f64, b: f64, c: f64, d: f64, alpha: f64, beta: f64) -> ModelParams {
    ModelParams::new(a, b, c, d, alpha, beta).unwrap()
}

#[test]
fn symmetric_coexistence_on_a_square() {
    let grid = Grid::rectangle(PI, PI, 14, 14).unwrap();
    let p = params(6.0, 0.5, 6.0, 0.5, 0.0, 0.0);
    let seeds = default_seeds(&grid, &p, 11).unwrap();
    let mut records = deflated_solve(&p, &seeds, &Default::default()).unwrap();

    let exact = solve_logistic(&grid, 6.0).unwrap().map(|t| t / 1.5).unwrap();
    let expected = StateVector::new(exact.clone(), exact).unwrap();
    let found = records
        .iter_mut()
        .filter(|r| r.is_coexistence())
        .min_by(|x, y| {
            x.state.max_abs_diff(&expected).total_cmp(&y.state.max_abs_diff(&expected))
        })
        .expect("a coexistence state");
    assert!(found.state.max_abs_diff(&expected) < 1e-6);

    // weak competition: the symmetric state is linearly stable
    let spectrum = assess_record(found).unwrap();
    assert_eq!(found.stability, Stability::Stable);
    assert!(spectrum[0].re > 0.0);
}

#[test]
fn thresholds_are_principal_eigenvalues_of_the_resident_pressure() {
    let grid = Grid::interval(PI, 120).unwrap();
    let p = params(3.0, 1.3, 4.0, 0.7, 0.4, 0.9);

    let theta_c = solve_logistic(&grid, p.c).unwrap();
    let pressure = theta_c.map(|v| p.b * v / (1.0 + p.beta * v)).unwrap();
    assert_abs_diff_eq!(
        threshold_a0(&grid, &p).unwrap(),
        principal_eigenvalue(&grid, &pressure).unwrap(),
        epsilon = 1e-10
    );

    let theta_a = solve_logistic(&grid, p.a).unwrap();
    let pressure = theta_a.map(|u| p.d * u / (1.0 + p.alpha * u)).unwrap();
    assert_abs_diff_eq!(
        threshold_c0(&grid, &p).unwrap(),
        principal_eigenvalue(&grid, &pressure).unwrap(),
        epsilon = 1e-10
    );
}

#[test]
fn branch_points_are_steady_states() {
    let grid = Grid::interval(PI, 80).unwrap();
    let p = params(3.0, 1.0, 4.0, 0.5, 0.5, 0.2);
    for which in [BranchKind::A, BranchKind::C] {
        let branch = continue_branch(&grid, &p, which, 0.05, 5).unwrap();
        assert!(branch.truncated.is_none());
        assert_eq!(branch.points.len(), 5);
        for pt in &branch.points {
            let r = residual(&pt.state, &branch.params_at(pt)).unwrap();
            assert!(r.norm_inf() < 1e-8, "{which:?} residual {}", r.norm_inf());
            assert!(pt.state.u.min() > 0.0 && pt.state.v.min() > 0.0);
        }
        // the parameter leaves the threshold in the direction of the first coefficient
        let last = branch.points.last().unwrap();
        let moved = last.param_value - branch.data.threshold;
        assert_eq!(moved.signum(), branch.data.coeff1.signum());
    }
}
