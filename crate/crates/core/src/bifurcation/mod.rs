//! Local bifurcation of coexistence states from the semi-trivial branches:
//! thresholds, first-order expansion data, linearized spectra and
//! pseudo-arclength continuation.

mod continuation;
mod data;
mod spectrum;

pub use continuation::{
    continue_branch, extrapolate_to_zero, Branch, BranchPoint, CORRECTOR_MAX_ITERATIONS,
    CORRECTOR_TOL, MIN_STEPS, S_MAX_CAP,
};
pub use data::{
    bifurcation_data, bifurcation_data_a, bifurcation_data_c, threshold_a0, threshold_c0,
    BifurcationData, BranchKind,
};
pub use spectrum::{
    assess_record, assess_stability, linearized_spectrum, RITZ_TOL, STABILITY_EIGS, STAB_TOL,
};
