//! Row-compressed sparse matrices and a banded LU factorization with partial
//! pivoting.
//!
//! Every operator assembled by this crate is banded: the 1D Laplacian is
//! tridiagonal, the 2D five-point stencil has bandwidth `nx`, and the
//! interleaved two-species Jacobian doubles those. A band solver is therefore
//! a sparse direct solver here, with `O(n * bw^2)` factorization cost.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Square or rectangular sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are
    /// summed. The symmetry flag is set from an exact entrywise comparison.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        };
        m.symmetric = m.check_symmetric();
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.row_ptr[row + 1] - self.row_ptr[row]
    }

    /// Symmetry flag recorded at construction.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `(col, value)` pairs of one row, in increasing column order.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Returns `self + diag(d)`; missing diagonal entries are inserted.
    pub fn add_diagonal(&self, d: &[f64]) -> CsrMatrix {
        assert_eq!(d.len(), self.nrows.min(self.ncols));
        let mut triplets = self.triplets();
        triplets.extend(d.iter().enumerate().map(|(i, &v)| (i, i, v)));
        CsrMatrix::from_triplets(self.nrows, self.ncols, triplets)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect()
    }

    /// Lower and upper bandwidth `(kl, ku)` of the stored pattern.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for r in 0..self.nrows {
            for (c, _) in self.row(r) {
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        (kl, ku)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] = v;
        }
        d
    }

    fn check_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }
}

/// LU factorization `P A = L U` of a banded matrix with row partial pivoting.
///
/// Storage is row-wise: row `i` keeps columns `i - kl ..= i + kl + ku`, which
/// leaves room for the fill-in that pivoting introduces above the diagonal.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        assert_eq!(a.nrows, a.ncols, "banded LU needs a square matrix");
        let n = a.nrows;
        let (kl, ku) = a.bandwidth();
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
        };
        for (r, c, v) in a.triplets() {
            *lu.at_mut(r, c) = v;
        }
        let tiny = 1e-14 * a.max_abs();
        let reach = kl + ku;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.at(k, k).abs();
            for r in k + 1..=last_row {
                let v = lu.at(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            lu.pivots[k] = p;
            if best <= tiny || best == 0.0 {
                return Err(Error::Singular { column: k });
            }
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let t = lu.at(k, j);
                    *lu.at_mut(k, j) = lu.at(p, j);
                    *lu.at_mut(p, j) = t;
                }
            }
            let pivot = lu.at(k, k);
            for r in k + 1..=last_row {
                let l = lu.at(r, k) / pivot;
                *lu.at_mut(r, k) = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let ukj = lu.at(k, j);
                        *lu.at_mut(r, j) -= l * ukj;
                    }
                }
            }
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c + self.kl - r < self.width);
        r * self.width + (c + self.kl - r)
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[self.offset(r, c)]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        let o = self.offset(r, c);
        &mut self.data[o]
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for r in k + 1..=(k + self.kl).min(n - 1) {
                    b[r] -= self.at(r, k) * bk;
                }
            }
        }
        let reach = self.kl + self.ku;
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                s -= self.at(i, j) * b[j];
            }
            b[i] = s / self.at(i, i);
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Infinity norm of a slice.
pub(crate) fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> CsrMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for r in 0..n {
            for c in r.saturating_sub(kl)..=(r + ku).min(n - 1) {
                // weak diagonal forces pivoting
                let v: f64 = rng.random_range(-1.0..1.0);
                t.push((r, c, if r == c { 0.1 * v } else { v }));
            }
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn duplicates_summed_and_lookup() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, 3.0)]);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert!(m.is_symmetric());
        assert_eq!(m.bandwidth(), (1, 1));
        let d = m.add_diagonal(&[1.0, 1.0]);
        assert_eq!(d.get(1, 1), 1.0);
        assert_eq!(d.nnz(), 4);
    }

    #[test]
    fn singular_matrix_detected() {
        let m = CsrMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)],
        );
        assert!(matches!(BandedLu::factor(&m), Err(Error::Singular { .. })));
    }

    proptest! {
        #[test]
        fn banded_solve_matches_dense(n in 4usize..40, kl in 0usize..4, ku in 0usize..4, seed in 0u64..1000) {
            let a = random_banded(n, kl, ku, seed);
            let dense = a.to_dense();
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + 0.5).collect();
            let b = a.mul_vec(&x_true);
            if let Ok(lu) = BandedLu::factor(&a) {
                let x = lu.solve(&b);
                let cond = dense.clone().try_inverse().map(|inv| inv.norm() * dense.norm()).unwrap_or(f64::INFINITY);
                prop_assume!(cond < 1e8);
                let err = x.iter().zip(&x_true).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
                prop_assert!(err < 1e-12 * cond.max(1.0), "err {} cond {}", err, cond);
            }
        }
    }
}
