use crate::error::Result;
use crate::grid::{assemble_neg_laplacian, Grid};
use crate::linalg::CsrMatrix;

use super::model::ModelParams;
use super::state::StateVector;

/// The discrete competition system on one grid, acting on interleaved
/// state vectors.
#[derive(Debug, Clone)]
pub struct CompetitionSystem {
    grid: Grid,
    params: ModelParams,
    laplacian: CsrMatrix,
}

impl CompetitionSystem {
    pub fn new(grid: Grid, params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            grid,
            params,
            laplacian: assemble_neg_laplacian(&grid),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn laplacian(&self) -> &CsrMatrix {
        &self.laplacian
    }

    pub fn set_params(&mut self, params: ModelParams) {
        self.params = params;
    }

    fn split(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            x.iter().step_by(2).copied().collect(),
            x.iter().skip(1).step_by(2).copied().collect(),
        )
    }

    /// `(-Δu - u(a - u - bvf), -Δv - v(c - v - duf))`, interleaved.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let p = &self.params;
        let (u, v) = Self::split(x);
        let lu = self.laplacian.mul_vec(&u);
        let lv = self.laplacian.mul_vec(&v);
        let mut out = Vec::with_capacity(x.len());
        for i in 0..u.len() {
            let f = p.response(u[i], v[i]);
            out.push(lu[i] - u[i] * (p.a - u[i] - p.b * v[i] * f));
            out.push(lv[i] - v[i] * (p.c - v[i] - p.d * u[i] * f));
        }
        out
    }

    /// Jacobian of [`residual`](Self::residual) on the interleaved layout.
    ///
    /// Per node the 2x2 reaction block is
    /// `[[-(a - 2u - bvf/(1+αu)), buf/(1+βv)], [dvf/(1+αu), -(c - 2v - duf/(1+βv))]]`.
    pub fn jacobian(&self, x: &[f64]) -> CsrMatrix {
        let n = self.grid.len();
        let mut triplets = Vec::with_capacity(2 * self.laplacian.nnz() + 4 * n);
        for (i, j, val) in self.laplacian.triplets() {
            triplets.push((2 * i, 2 * j, val));
            triplets.push((2 * i + 1, 2 * j + 1, val));
        }
        for (i, block) in self.reaction_blocks(x).into_iter().enumerate() {
            triplets.push((2 * i, 2 * i, block[0][0]));
            triplets.push((2 * i, 2 * i + 1, block[0][1]));
            triplets.push((2 * i + 1, 2 * i, block[1][0]));
            triplets.push((2 * i + 1, 2 * i + 1, block[1][1]));
        }
        CsrMatrix::from_triplets(2 * n, 2 * n, triplets)
    }

    /// Nodewise reaction part of the Jacobian (everything except `-Δ`).
    pub fn reaction_blocks(&self, x: &[f64]) -> Vec<[[f64; 2]; 2]> {
        let p = &self.params;
        x.chunks_exact(2)
            .map(|uv| {
                let (u, v) = (uv[0], uv[1]);
                let f = p.response(u, v);
                let gu = 1.0 + p.alpha * u;
                let gv = 1.0 + p.beta * v;
                [
                    [-(p.a - 2.0 * u - p.b * v * f / gu), p.b * u * f / gv],
                    [p.d * v * f / gu, -(p.c - 2.0 * v - p.d * u * f / gv)],
                ]
            })
            .collect()
    }
}

/// Residual of the steady problem at `state`.
pub fn residual(state: &StateVector, params: &ModelParams) -> Result<StateVector> {
    StateVector::new(state.u.clone(), state.v.clone())?;
    let sys = CompetitionSystem::new(*state.grid(), *params)?;
    StateVector::from_interleaved(*state.grid(), &sys.residual(&state.interleaved()))
}

/// Jacobian of the residual at `state` as a 2x2 block operator on the
/// interleaved unknowns; see [`jacobian_block`] to extract blocks.
pub fn jacobian(state: &StateVector, params: &ModelParams) -> Result<CsrMatrix> {
    StateVector::new(state.u.clone(), state.v.clone())?;
    let sys = CompetitionSystem::new(*state.grid(), *params)?;
    Ok(sys.jacobian(&state.interleaved()))
}

/// Block `(row, col)` of an interleaved two-species operator, with species
/// index 0 for `u` and 1 for `v`.
pub fn jacobian_block(op: &CsrMatrix, row: usize, col: usize) -> CsrMatrix {
    let n = op.nrows() / 2;
    let triplets = op
        .triplets()
        .into_iter()
        .filter(|&(r, c, _)| r % 2 == row && c % 2 == col)
        .map(|(r, c, v)| (r / 2, c / 2, v))
        .collect();
    CsrMatrix::from_triplets(n, n, triplets)
}
