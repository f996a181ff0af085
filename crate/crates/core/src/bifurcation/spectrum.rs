use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, BandedLu, CsrMatrix};
use crate::steady::{CompetitionSystem, ModelParams, SolutionRecord, Stability, StateVector};

/// `Re μ` beyond this decides stability.
pub const STAB_TOL: f64 = 1e-7;
/// Eigenvalues requested by stability calls.
pub const STABILITY_EIGS: usize = 6;
/// Ritz pairs are accepted when the Arnoldi residual estimate, relative to
/// the Ritz value, drops below this.
pub const RITZ_TOL: f64 = 1e-11;
const MAX_KRYLOV: usize = 300;
const CHECK_EVERY: usize = 5;
const START_SEED: u64 = 0x5eed;

/// Lower bound on `Re μ` for the linearization at `x`: the smallest
/// eigenvalue of the symmetric part is at least `λ_1(-Δ_h)` plus the
/// smallest eigenvalue over nodes of the symmetrized reaction block.
fn real_part_lower_bound(sys: &CompetitionSystem, x: &[f64]) -> f64 {
    let blocks = sys.reaction_blocks(x);
    let min_block = blocks
        .iter()
        .map(|b| {
            let off = 0.5 * (b[0][1] + b[1][0]);
            let mean = 0.5 * (b[0][0] + b[1][1]);
            let half = 0.5 * (b[0][0] - b[1][1]);
            mean - (half * half + off * off).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    sys.grid().discrete_lambda1() + min_block
}

/// Eigenvalues of the linearized operator at `state` closest to the left end
/// of its spectrum, sorted by real part.
///
/// Shift-invert Arnoldi with a shift `σ` below every `Re μ`. After the change
/// of sign `η → -η` the operator has non-positive off-diagonal entries, so
/// its eigenvalue of smallest real part is real and is the one nearest `σ`;
/// the remaining returned values are the next nearest. A repeated eigenvalue
/// may be reported once.
pub fn linearized_spectrum(
    state: &StateVector,
    params: &ModelParams,
    k: usize,
) -> Result<Vec<Complex64>> {
    let sys = CompetitionSystem::new(*state.grid(), *params)?;
    let x = state.interleaved();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("state has non-finite entries".into()));
    }
    operator_spectrum(&sys.jacobian(&x), real_part_lower_bound(&sys, &x) - 1.0, k)
}

/// Stability verdict from a spectrum.
pub fn assess_stability(spectrum: &[Complex64]) -> Stability {
    if spectrum.iter().any(|m| m.re < -STAB_TOL) {
        Stability::Unstable
    } else if !spectrum.is_empty() && spectrum.iter().all(|m| m.re > STAB_TOL) {
        Stability::Stable
    } else {
        Stability::Undetermined
    }
}

/// Fills in `record.stability` and returns the computed spectrum.
pub fn assess_record(record: &mut SolutionRecord) -> Result<Vec<Complex64>> {
    let spectrum = linearized_spectrum(&record.state, &record.params, STABILITY_EIGS)?;
    record.stability = assess_stability(&spectrum);
    Ok(spectrum)
}

pub(crate) fn operator_spectrum(
    op: &CsrMatrix,
    shift: f64,
    k: usize,
) -> Result<Vec<Complex64>> {
    let n = op.nrows();
    if k == 0 {
        return Ok(Vec::new());
    }
    let k = k.min(n);
    let lu = BandedLu::factor(&op.add_diagonal(&vec![-shift; n]))?;
    let max_m = MAX_KRYLOV.min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v0: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let nrm = dot(&v0, &v0).sqrt();
    v0.iter_mut().for_each(|x| *x /= nrm);
    let mut basis = vec![v0];
    let mut h = DMatrix::<f64>::zeros(max_m + 1, max_m);

    for j in 0..max_m {
        let mut w = lu.solve(&basis[j]);
        // classical Gram-Schmidt, applied twice
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = dot(q, &w);
                h[(i, j)] += c;
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let beta = dot(&w, &w).sqrt();
        h[(j + 1, j)] = beta;
        let m = j + 1;
        let exhausted = beta <= 1e-14 * h.view((0, 0), (m, m)).norm() || m == n;
        if exhausted || m == max_m || (m >= k && m % CHECK_EVERY == 0) {
            if let Some(mus) = ritz(&h, m, k, shift, exhausted)? {
                return Ok(mus);
            }
        }
        if exhausted {
            break;
        }
        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(w);
    }
    Err(Error::Spectrum(format!(
        "shift-invert Arnoldi did not converge {k} eigenvalues in {max_m} steps"
    )))
}

/// Ritz values of the leading `m x m` block of `h`, mapped back to `μ`,
/// if the `k` largest in modulus have converged.
fn ritz(h: &DMatrix<f64>, m: usize, k: usize, shift: f64, exact: bool) -> Result<Option<Vec<Complex64>>> {
    let hm = h.view((0, 0), (m, m)).into_owned();
    let schur = nalgebra::linalg::Schur::try_new(hm.clone(), 1e-14, 10_000)
        .ok_or_else(|| Error::Spectrum("Hessenberg eigenvalues did not converge".into()))?;
    let mut thetas: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    thetas.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let beta = h[(m, m - 1)];
    let wanted = k.min(thetas.len());
    for theta in &thetas[..wanted] {
        if exact {
            break;
        }
        let y = ritz_vector(&hm, *theta);
        if beta * y[m - 1].norm() > RITZ_TOL * theta.norm() {
            return Ok(None);
        }
    }
    let mut mus: Vec<Complex64> = thetas[..wanted]
        .iter()
        .map(|t| Complex64::new(shift, 0.0) + t.inv())
        .collect();
    mus.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(Some(mus))
}

/// Unit eigenvector of `hm` for the eigenvalue `theta` by inverse iteration.
fn ritz_vector(hm: &DMatrix<f64>, theta: Complex64) -> DVector<Complex64> {
    let m = hm.nrows();
    let scale = hm.norm().max(1e-300);
    let perturbed = theta + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let shifted = DMatrix::from_fn(m, m, |i, j| {
        let diag = if i == j { perturbed } else { Complex64::new(0.0, 0.0) };
        Complex64::new(hm[(i, j)], 0.0) - diag
    });
    let lu = shifted.lu();
    let mut y = DVector::from_element(m, Complex64::new(1.0, 0.0));
    for _ in 0..3 {
        if let Some(next) = lu.solve(&y) {
            let nrm = next.norm();
            if nrm.is_finite() && nrm > 0.0 {
                y = next / Complex64::new(nrm, 0.0);
            }
        }
    }
    y
}
