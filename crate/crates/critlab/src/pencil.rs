//! Inverse-iteration eigensolvers for the pencil `A x = lambda B x`.
//!
//! Everything here is deterministic: fixed starting vectors, fixed shift
//! schedules, no randomization. Shifts are refined only when `A` is
//! symmetric, where the pivot signs of a profile factorization count the
//! eigenvalues below the shift (Sylvester's law); a refinement is accepted
//! only when that count is zero, so the iteration operator stays
//! sign-preserving.

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix, ProfileLu};

pub(crate) struct PencilSolution {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Finds `s >= 0` such that `A + s*B` factors with all pivots positive.
pub(crate) fn find_psd_shift(a: &CsrMatrix, b: &CsrMatrix) -> Result<(f64, ProfileLu)> {
    let mut s = 0.0f64;
    for _ in 0..64 {
        let shifted = if s == 0.0 { a.clone() } else { a.add_scaled(b, s) };
        if let Ok(lu) = ProfileLu::factor(&shifted, 1e-13) {
            if lu.negative_pivots() == 0 {
                return Ok((s, lu));
            }
        }
        s = if s == 0.0 { 1.0 } else { s * 4.0 };
    }
    Err(Error::Numerical(
        "could not find a positive-definite shift for the pencil".into(),
    ))
}

fn b_normalize(v: &mut [f64], b: &CsrMatrix) -> Result<f64> {
    let bv = b.matvec(v);
    let norm2_b = dot(v, &bv);
    if !(norm2_b > 0.0) {
        return Err(Error::Numerical(
            "iterate lost all mass in the B-seminorm".into(),
        ));
    }
    let norm = norm2_b.sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    Ok(norm)
}

/// Smallest eigenvalue of `A x = lambda B x` for symmetric `A` and
/// positive-semidefinite `B` (possibly singular), by shift-refined inverse
/// iteration. Convergence: `||A x - lambda B x|| <= tol * ||B x||` with a
/// `max(1, |lambda|)` scale allowance.
pub(crate) fn smallest_sym_pencil(
    a: &CsrMatrix,
    b: &CsrMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<PencilSolution> {
    solve_pencil(a, b, None, tol, max_iter, true, false)
}

/// Principal (smallest, positive-eigenvector) eigenpair by inverse power
/// iteration with entrywise clamping of negative values to zero after each
/// application of the iteration operator. The clamp is a no-op once the
/// iterate lies in the positive cone; if clamping annihilates the iterate,
/// the discretization has no positive dominant mode and an error is raised.
pub(crate) fn positive_principal_pencil(
    a: &CsrMatrix,
    b: &CsrMatrix,
    start_shift: Option<f64>,
    tol: f64,
    max_iter: usize,
    symmetric: bool,
) -> Result<PencilSolution> {
    solve_pencil(a, b, start_shift, tol, max_iter, symmetric, true)
}

fn solve_pencil(
    a: &CsrMatrix,
    b: &CsrMatrix,
    start_shift: Option<f64>,
    tol: f64,
    max_iter: usize,
    refine_shifts: bool,
    clamp_positive: bool,
) -> Result<PencilSolution> {
    let n = a.n_rows;
    // sigma: current shift, factor of (A - sigma B). Start PSD-safe.
    let (s0, mut lu) = match start_shift {
        Some(s) => {
            let shifted = a.add_scaled(b, s);
            match ProfileLu::factor(&shifted, 1e-13) {
                Ok(lu) => (s, lu),
                Err(_) => find_psd_shift(a, b)?,
            }
        }
        None => find_psd_shift(a, b)?,
    };
    let mut sigma = -s0;
    let mut v = vec![1.0; n];
    b_normalize(&mut v, b)?;
    let mut lambda = f64::INFINITY;
    let mut last_residual = f64::INFINITY;
    for it in 1..=max_iter {
        let bv = b.matvec(&v);
        let mut w = lu.solve(&bv);
        if clamp_positive {
            // Keep the iterate in the positive cone; flip a globally
            // negative iterate first (an inverse with sign flipped still
            // carries the principal direction).
            let pos: f64 = w.iter().map(|x| x.max(0.0).powi(2)).sum();
            let neg: f64 = w.iter().map(|x| (-x).max(0.0).powi(2)).sum();
            if neg > pos {
                for x in w.iter_mut() {
                    *x = -*x;
                }
            }
            for x in w.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            if w.iter().all(|&x| x == 0.0) {
                return Err(Error::Positivity(
                    "iterate collapsed to zero after positivity clamping".into(),
                ));
            }
        }
        b_normalize(&mut w, b)?;
        let aw = a.matvec(&w);
        let bw = b.matvec(&w);
        let new_lambda = dot(&w, &aw) / dot(&w, &bw);
        let mut r = aw.clone();
        for i in 0..n {
            r[i] -= new_lambda * bw[i];
        }
        let res = norm2(&r);
        let bw_norm = norm2(&bw);
        let delta = (new_lambda - lambda).abs();
        v = w;
        lambda = new_lambda;
        last_residual = res;
        // The residual cannot drop below the rounding floor of the matvec.
        let res_floor = 16.0 * f64::EPSILON * a.max_abs() * norm2(&v);
        let res_target = (tol * bw_norm.max(f64::MIN_POSITIVE) * lambda.abs().max(1.0))
            .max(res_floor);
        if res <= res_target && delta <= tol * lambda.abs().max(1.0) {
            return Ok(PencilSolution { lambda, vector: v, iterations: it, residual: res });
        }
        // Periodic shift refinement: move sigma just below the current
        // Rayleigh estimate, accepting only shifts that keep every pivot
        // positive (so sigma stays below the whole pencil spectrum).
        if refine_shifts && it % 8 == 0 {
            // Margin scales with the eigenvalue itself so that shifts can
            // track spectra arbitrarily close to zero.
            let mut margin = (4.0 * delta).max(1e-3 * lambda.abs()).max(f64::MIN_POSITIVE);
            for _ in 0..8 {
                let cand = lambda - margin;
                if cand <= sigma {
                    break;
                }
                let shifted = a.add_scaled(b, -cand);
                if let Ok(cand_lu) = ProfileLu::factor(&shifted, 1e-13) {
                    if cand_lu.negative_pivots() == 0 {
                        sigma = cand;
                        lu = cand_lu;
                        break;
                    }
                }
                margin *= 4.0;
            }
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: last_residual })
}
