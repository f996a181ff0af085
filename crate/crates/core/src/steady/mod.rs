//! Steady states of the competition system: the Bazykin response, residual
//! and Jacobian, the logistic states `θ_a`, damped and deflated Newton
//! solvers, the a priori bound check and the sub/supersolution verifier.

mod bounds;
mod deflation;
mod logistic;
mod model;
mod newton;
mod state;
mod subsuper;
mod system;

pub use bounds::{check_apriori, check_apriori_against, LOGISTIC_SLACK, RATE_SLACK};
pub use deflation::{default_seeds, deflated_solve, DeflationOptions, DISTINCT_TOL, RANDOM_SEEDS};
pub use logistic::{solve_logistic, LOGISTIC_TOL};
pub use model::{bazykin_response, ModelParams};
pub use newton::{
    classify, newton_solve, Classification, NewtonOptions, SolutionRecord, Stability,
    ABSENT_TOL, POS_REL_TOL,
};
pub use state::StateVector;
pub use subsuper::{
    alpha_scan, verify_sub_super, AlphaScan, InequalityReport, SubSuperReport, COMPACT_FRACTION,
    INEQUALITY_TOL,
};
pub use system::{jacobian, jacobian_block, residual, CompetitionSystem};
