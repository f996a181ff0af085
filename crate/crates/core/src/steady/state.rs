use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// Densities `(u, v)` of the two species on a shared grid.
///
/// Solvers work on the interleaved vector `[u_0, v_0, u_1, v_1, ...]`, which
/// keeps the coupled Jacobian banded.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub u: ScalarField,
    pub v: ScalarField,
}

impl StateVector {
    pub fn new(u: ScalarField, v: ScalarField) -> Result<Self> {
        u.check_same_grid(&v)?;
        Ok(Self { u, v })
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.grid() != grid {
            return Err(Error::GridMismatch("state lives on a different grid".into()));
        }
        Ok(())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            u: ScalarField::zeros(grid),
            v: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn interleaved(&self) -> Vec<f64> {
        self.u
            .values()
            .iter()
            .zip(self.v.values())
            .flat_map(|(&u, &v)| [u, v])
            .collect()
    }

    pub fn from_interleaved(grid: Grid, x: &[f64]) -> Result<Self> {
        if x.len() != 2 * grid.len() {
            return Err(Error::GridMismatch(format!(
                "state vector has {} entries, expected {}",
                x.len(),
                2 * grid.len()
            )));
        }
        let u = x.iter().step_by(2).copied().collect();
        let v = x.iter().skip(1).step_by(2).copied().collect();
        Ok(Self {
            u: ScalarField::new(grid, u)?,
            v: ScalarField::new(grid, v)?,
        })
    }

    /// `(v, u)`, the state seen by the system with exchanged species.
    pub fn swapped(&self) -> Self {
        Self {
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }

    /// Largest nodal difference over both components.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        let du = self
            .u
            .values()
            .iter()
            .zip(other.u.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let dv = self
            .v
            .values()
            .iter()
            .zip(other.v.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        du.max(dv)
    }

    pub fn norm_inf(&self) -> f64 {
        self.u.norm_inf().max(self.v.norm_inf())
    }
}
