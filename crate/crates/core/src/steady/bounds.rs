use crate::error::Result;
use crate::grid::ScalarField;

use super::logistic::solve_logistic;
use super::newton::SolutionRecord;

/// Slack on `u ≤ a`, `v ≤ c`.
pub const RATE_SLACK: f64 = 1e-8;
/// Slack on `u ≤ θ_a`, `v ≤ θ_c`.
pub const LOGISTIC_SLACK: f64 = 1e-6;

/// A priori bounds of a non-negative steady state: `u ≤ θ_a ≤ a` and
/// `v ≤ θ_c ≤ c` nodewise.
pub fn check_apriori(record: &SolutionRecord) -> Result<bool> {
    let grid = record.state.grid();
    let theta_a = solve_logistic(grid, record.params.a)?;
    let theta_c = solve_logistic(grid, record.params.c)?;
    Ok(check_apriori_against(record, &theta_a, &theta_c))
}

/// [`check_apriori`] with precomputed logistic states.
pub fn check_apriori_against(
    record: &SolutionRecord,
    theta_a: &ScalarField,
    theta_c: &ScalarField,
) -> bool {
    let p = &record.params;
    let below = |field: &ScalarField, rate: f64, theta: &ScalarField| {
        field
            .values()
            .iter()
            .zip(theta.values())
            .all(|(&w, &t)| w <= rate + RATE_SLACK && w <= t + LOGISTIC_SLACK)
    };
    below(&record.state.u, p.a, theta_a) && below(&record.state.v, p.c, theta_c)
}
