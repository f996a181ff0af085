//! Uniform finite-difference grids with homogeneous Dirichlet boundary,
//! nodal fields on the interior nodes, the assembled negative Laplacian and
//! trapezoid quadrature.
//!
//! Only interior nodes carry unknowns. Boundary values are identically zero
//! and never stored, so a field on an interval with `n` interior points has
//! exactly `n` entries and the 2D layout is row-major in `x`
//! (`index = iy * nx + ix`).

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Smallest admissible number of interior points per axis.
pub const MIN_POINTS: usize = 3;

/// Geometry of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridKind {
    /// The interval `[0, length]`.
    Interval { length: f64 },
    /// The rectangle `[0, lx] x [0, ly]`.
    Rectangle { lx: f64, ly: f64 },
}

/// A uniform grid on an interval or rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    kind: GridKind,
    n: [usize; 2],
    h: [f64; 2],
}

impl Grid {
    /// Interval `[0, length]` with `n` interior points, `h = length / (n + 1)`.
    pub fn interval(length: f64, n: usize) -> Result<Self> {
        check_axis("length", length, n)?;
        Ok(Self {
            kind: GridKind::Interval { length },
            n: [n, 1],
            h: [length / (n + 1) as f64, 1.0],
        })
    }

    /// Rectangle `[0, lx] x [0, ly]` with `nx * ny` interior points.
    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        check_axis("lx", lx, nx)?;
        check_axis("ly", ly, ny)?;
        Ok(Self {
            kind: GridKind::Rectangle { lx, ly },
            n: [nx, ny],
            h: [lx / (nx + 1) as f64, ly / (ny + 1) as f64],
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Spatial dimension, 1 or 2.
    pub fn dim(&self) -> usize {
        match self.kind {
            GridKind::Interval { .. } => 1,
            GridKind::Rectangle { .. } => 2,
        }
    }

    /// Interior points along `axis`.
    pub fn points(&self, axis: usize) -> usize {
        self.n[axis]
    }

    /// Spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    /// Side lengths of the domain, one per axis.
    pub fn lengths(&self) -> Vec<f64> {
        match self.kind {
            GridKind::Interval { length } => vec![length],
            GridKind::Rectangle { lx, ly } => vec![lx, ly],
        }
    }

    /// Number of interior nodes (length of every field on this grid).
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of a node: `h` in 1D, `hx * hy` in 2D.
    pub fn cell_volume(&self) -> f64 {
        match self.kind {
            GridKind::Interval { .. } => self.h[0],
            GridKind::Rectangle { .. } => self.h[0] * self.h[1],
        }
    }

    /// Coordinates of interior node `index`; the second entry is zero in 1D.
    pub fn coords(&self, index: usize) -> [f64; 2] {
        let ix = index % self.n[0];
        let iy = index / self.n[0];
        match self.kind {
            GridKind::Interval { .. } => [(ix + 1) as f64 * self.h[0], 0.0],
            GridKind::Rectangle { .. } => {
                [(ix + 1) as f64 * self.h[0], (iy + 1) as f64 * self.h[1]]
            }
        }
    }

    /// Closed-form smallest eigenvalue of the discrete negative Laplacian,
    /// `sum_axes (4 / h^2) sin^2(pi h / (2 L))`.
    pub fn discrete_lambda1(&self) -> f64 {
        self.lengths()
            .iter()
            .enumerate()
            .map(|(axis, &len)| {
                let h = self.h[axis];
                let s = (PI * h / (2.0 * len)).sin();
                4.0 * s * s / (h * h)
            })
            .sum()
    }

    /// Closed-form largest eigenvalue of the discrete negative Laplacian.
    pub fn discrete_lambda_max(&self) -> f64 {
        self.lengths()
            .iter()
            .enumerate()
            .map(|(axis, &len)| {
                let h = self.h[axis];
                let s = (PI * self.n[axis] as f64 * h / (2.0 * len)).sin();
                4.0 * s * s / (h * h)
            })
            .sum()
    }
}

fn check_axis(name: &str, length: f64, n: usize) -> Result<()> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Precondition(format!(
            "{name} must be positive and finite, got {length}"
        )));
    }
    if n < MIN_POINTS {
        return Err(Error::Precondition(format!(
            "need at least {MIN_POINTS} interior points per axis, got {n}"
        )));
    }
    Ok(())
}

/// Second-order central-difference `-Δ` on the interior nodes: the
/// `[-1, 2, -1] / h^2` stencil in 1D and the 5-point stencil in 2D, with the
/// Dirichlet boundary rows eliminated.
pub fn assemble_neg_laplacian(grid: &Grid) -> CsrMatrix {
    let [nx, ny] = grid.n;
    let cx = 1.0 / (grid.h[0] * grid.h[0]);
    let cy = if grid.dim() == 2 {
        1.0 / (grid.h[1] * grid.h[1])
    } else {
        0.0
    };
    let mut triplets = Vec::with_capacity(5 * grid.len());
    for iy in 0..ny {
        for ix in 0..nx {
            let row = iy * nx + ix;
            if grid.dim() == 2 && iy > 0 {
                triplets.push((row, row - nx, -cy));
            }
            if ix > 0 {
                triplets.push((row, row - 1, -cx));
            }
            triplets.push((row, row, 2.0 * cx + 2.0 * cy));
            if ix + 1 < nx {
                triplets.push((row, row + 1, -cx));
            }
            if grid.dim() == 2 && iy + 1 < ny {
                triplets.push((row, row + nx, -cy));
            }
        }
    }
    CsrMatrix::from_triplets(grid.len(), grid.len(), triplets)
}

/// Nodal values of one quantity on the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wraps `values`, checking length and finiteness.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} interior nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!(
                "non-finite value {} at node {i}",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f(x, y)` at the interior nodes (`y = 0` in 1D).
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.coords(i);
                f(x, y)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid value of `∫_Ω field dx` with zero boundary values.
    pub fn integrate(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    /// Quadrature inner product `∫_Ω self * other dx`.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(
        &self,
        other: &ScalarField,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<ScalarField> {
        pointwise(&[self, other], |v| f(v[0], v[1]))
    }

    pub fn scale(&self, k: f64) -> ScalarField {
        Self::from_vec_unchecked(self.grid, self.values.iter().map(|v| k * v).collect())
    }

    pub(crate) fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

/// Trapezoid quadrature of a field; see [`ScalarField::integrate`].
pub fn integrate(field: &ScalarField) -> f64 {
    field.integrate()
}

/// Applies `f` node by node to the values of `fields`, which must share one
/// grid. `f` receives one value per field, in order.
pub fn pointwise(fields: &[&ScalarField], f: impl Fn(&[f64]) -> f64) -> Result<ScalarField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::Precondition("pointwise needs at least one field".into()))?;
    for other in &fields[1..] {
        first.check_same_grid(other)?;
    }
    let mut args = vec![0.0; fields.len()];
    let values = (0..first.len())
        .map(|i| {
            for (slot, field) in args.iter_mut().zip(fields) {
                *slot = field.values[i];
            }
            f(&args)
        })
        .collect();
    ScalarField::new(first.grid, values)
}

/// Writes named fields as CSV: `node,x[,y],<name>...`, one row per interior
/// node, `.` decimal separator and `\n` line endings.
pub fn write_fields_csv<W: Write>(mut out: W, columns: &[(&str, &ScalarField)]) -> io::Result<()> {
    let Some((_, first)) = columns.first() else {
        return Ok(());
    };
    let grid = first.grid;
    if columns.iter().any(|(_, f)| f.grid != grid) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "fields written together must share one grid",
        ));
    }
    write!(out, "node,x")?;
    if grid.dim() == 2 {
        write!(out, ",y")?;
    }
    for (name, _) in columns {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for i in 0..grid.len() {
        let [x, y] = grid.coords(i);
        write!(out, "{i},{x}")?;
        if grid.dim() == 2 {
            write!(out, ",{y}")?;
        }
        for (_, field) in columns {
            write!(out, ",{}", field.values[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(Grid::interval(1.0, 2).is_err());
        assert!(Grid::interval(0.0, 10).is_err());
        assert!(Grid::rectangle(1.0, f64::NAN, 4, 4).is_err());
        let g = Grid::interval(4.0, 3).unwrap();
        assert_eq!(g.spacing(0), 1.0);
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn tridiagonal_stencil_for_unit_spacing() {
        let g = Grid::interval(4.0, 3).unwrap();
        let a = assemble_neg_laplacian(&g).to_dense();
        let expected = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a[(i, j)], expected[i][j]);
            }
        }
    }

    #[test]
    fn constant_field_has_zero_second_difference_inside() {
        let g = Grid::interval(PI, 199).unwrap();
        let a = assemble_neg_laplacian(&g);
        let y = a.mul_vec(&vec![1.0; g.len()]);
        for v in &y[1..g.len() - 1] {
            assert_eq!(*v, 0.0);
        }
        // boundary-adjacent rows see the eliminated zero Dirichlet value
        assert!(y[0] > 0.0 && y[g.len() - 1] > 0.0);
    }

    #[test]
    fn laplacian_symmetric_entrywise() {
        for g in [
            Grid::interval(2.0, 17).unwrap(),
            Grid::rectangle(1.0, 2.5, 6, 9).unwrap(),
        ] {
            let a = assemble_neg_laplacian(&g);
            assert!(a.is_symmetric());
            let d = a.to_dense();
            assert_eq!(d, d.transpose());
        }
    }

    #[test]
    fn five_point_stencil_rows() {
        let g = Grid::rectangle(4.0, 8.0, 3, 3).unwrap();
        let a = assemble_neg_laplacian(&g);
        // hx = 1, hy = 2: centre row has 2 + 0.5 on the diagonal
        assert_eq!(a.get(4, 4), 2.5);
        assert_eq!(a.get(4, 3), -1.0);
        assert_eq!(a.get(4, 5), -1.0);
        assert_eq!(a.get(4, 1), -0.25);
        assert_eq!(a.get(4, 7), -0.25);
        assert_eq!(a.row_nnz(0), 3);
    }

    #[test]
    fn closed_form_lambda1_near_one_on_pi() {
        let g = Grid::interval(PI, 199).unwrap();
        assert_abs_diff_eq!(g.discrete_lambda1(), 1.0, epsilon = 1e-3);
        let r = Grid::rectangle(PI, PI, 32, 32).unwrap();
        assert_abs_diff_eq!(r.discrete_lambda1(), 2.0, epsilon = 2e-3);
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::interval(PI, 999).unwrap();
        assert_eq!(ScalarField::zeros(g).integrate(), 0.0);
        let s = ScalarField::from_fn(g, |x, _| x.sin()).unwrap();
        assert_abs_diff_eq!(integrate(&s), 2.0, epsilon = 1e-4);
        let s2 = ScalarField::from_fn(g, |x, _| x.sin().powi(2)).unwrap();
        assert_abs_diff_eq!(s2.integrate(), PI / 2.0, epsilon = 1e-4);
    }

    #[test]
    fn quadrature_exact_for_piecewise_linear() {
        // hat function peaking at the midpoint of [0, 2] is linear per cell
        let g = Grid::interval(2.0, 9).unwrap();
        let hat = ScalarField::from_fn(g, |x, _| 1.0 - (x - 1.0).abs()).unwrap();
        assert_abs_diff_eq!(hat.integrate(), 1.0, epsilon = 1e-14);
        let r = Grid::rectangle(2.0, 2.0, 9, 9).unwrap();
        let tent = ScalarField::from_fn(r, |x, y| (1.0 - (x - 1.0).abs()) * (1.0 - (y - 1.0).abs()))
            .unwrap();
        assert_abs_diff_eq!(tent.integrate(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn odd_reflection_integrates_to_zero() {
        let g = Grid::interval(3.0, 101).unwrap();
        let f = ScalarField::from_fn(g, |x, _| (x - 1.5) * (1.0 + (x - 1.5).powi(2)).exp()).unwrap();
        assert!(f.integrate().abs() < 1e-13);
    }

    #[test]
    fn quadrature_second_order() {
        let exact = (PI.exp() + 1.0) / 2.0; // ∫_0^π e^x sin x dx
        let err = |n: usize| {
            let g = Grid::interval(PI, n).unwrap();
            let f = ScalarField::from_fn(g, |x, _| x.exp() * x.sin()).unwrap();
            (f.integrate() - exact).abs()
        };
        let mut n = 25;
        for _ in 0..4 {
            let ratio = err(n) / err(2 * n + 1);
            assert!(ratio >= 3.5, "ratio {ratio} at n = {n}");
            n = 2 * n + 1;
        }
    }

    #[test]
    fn pointwise_examples() {
        let g = Grid::interval(1.0, 5).unwrap();
        let f = ScalarField::from_fn(g, |x, _| x * x).unwrap();
        assert_eq!(pointwise(&[&f], |v| v[0]).unwrap(), f);
        let z = ScalarField::zeros(g);
        assert_eq!(f.zip_map(&z, |a, b| a * b).unwrap(), z);
        let other = Grid::interval(2.0, 5).unwrap();
        assert!(matches!(
            f.zip_map(&ScalarField::zeros(other), |a, b| a + b),
            Err(Error::GridMismatch(_))
        ));
        assert!(ScalarField::new(g, vec![0.0; 4]).is_err());
        assert!(ScalarField::new(g, vec![f64::NAN; 5]).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::rectangle(1.0, 1.0, 3, 3).unwrap();
        let f = ScalarField::constant(g, 0.5);
        let mut buf = Vec::new();
        write_fields_csv(&mut buf, &[("u", &f), ("v", &f)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("node,x,y,u,v"));
        assert_eq!(lines.next(), Some("0,0.25,0.25,0.5,0.5"));
        assert_eq!(text.lines().count(), 10);
    }
}
