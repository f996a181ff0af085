//! Numerical toolkit for the diffusive two-species competition system with
//! Bazykin saturation
//!
//! ```text
//!   -Δu = u (a - u - b v f(u, v)),
//!   -Δv = v (c - v - d u f(u, v)),      u = v = 0 on ∂Ω,
//!   f(u, v) = 1 / ((1 + α u)(1 + β v)),
//! ```
//!
//! discretized by second-order finite differences on intervals and
//! rectangles. The crate provides principal eigenpairs of `-Δ + q`, the
//! logistic states `θ_a`, damped and deflated Newton solvers for coexistence
//! states, sub/supersolution checks, bifurcation thresholds and coefficients,
//! linearized spectra and pseudo-arclength continuation of the branches that
//! emanate from the semi-trivial states.

pub mod bifurcation;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod steady;

pub use error::{Error, Result};
pub use grid::{Grid, GridKind, ScalarField};
pub use linalg::{BandedLu, CsrMatrix};
