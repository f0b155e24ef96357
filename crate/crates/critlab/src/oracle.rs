//! Independent references used by the test suites: transcendental 1D
//! eigenvalues by bisection, closed-form two-solution Green kernels, and
//! dense eigendecomposition/inversion of small assembled systems.
//!
//! Nothing here shares code with the sparse solve or iteration paths it is
//! used to check.

use nalgebra::DMatrix;

use crate::discretize::AssembledSystem;
use crate::error::{Error, Result};

/// Boundary condition at one end of the interval; Robin carries the ratio
/// `gamma/beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EndCondition {
    Dirichlet,
    Robin(f64),
}

/// Coefficient families with closed-form solution bases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientFamily {
    /// `-a u'' + c u`
    Constant { a: f64, c: f64 },
    /// `-u'' - mu/x^2 u` on intervals with positive left end (or 0 for the
    /// Green kernel when the left condition is Dirichlet)
    Hardy { mu: f64 },
}

/// Two-point boundary value problem on an interval.
#[derive(Clone, Copy, Debug)]
pub struct Oracle1DProblem {
    pub family: CoefficientFamily,
    pub interval: (f64, f64),
    pub left: EndCondition,
    pub right: EndCondition,
}

impl Oracle1DProblem {
    pub fn new(
        family: CoefficientFamily,
        interval: (f64, f64),
        left: EndCondition,
        right: EndCondition,
    ) -> Result<Self> {
        if !(interval.1 > interval.0) {
            return Err(Error::InvalidGeometry(format!(
                "degenerate oracle interval ({}, {})",
                interval.0, interval.1
            )));
        }
        Ok(Oracle1DProblem { family, interval, left, right })
    }
}

/// Value and derivative at `s = x - alpha` of the solution satisfying the
/// left condition, for `-a u'' + (c - lambda) u = 0`.
fn shoot(a: f64, c: f64, lambda: f64, left: EndCondition, s: f64) -> (f64, f64) {
    let q = (lambda - c) / a;
    let (u0, du0) = match left {
        EndCondition::Dirichlet => (0.0, 1.0),
        EndCondition::Robin(r) => (1.0, r / a),
    };
    if q > 1e-12 {
        let w = q.sqrt();
        let (sn, cs) = ((w * s).sin(), (w * s).cos());
        (u0 * cs + du0 / w * sn, -u0 * w * sn + du0 * cs)
    } else if q < -1e-12 {
        let m = (-q).sqrt();
        let (sh, ch) = ((m * s).sinh(), (m * s).cosh());
        (u0 * ch + du0 / m * sh, u0 * m * sh + du0 * ch)
    } else {
        (u0 + du0 * s, du0)
    }
}

/// Defect of the right boundary condition for the shooting solution.
fn characteristic(problem: &Oracle1DProblem, lambda: f64) -> f64 {
    let (a, c) = match problem.family {
        CoefficientFamily::Constant { a, c } => (a, c),
        CoefficientFamily::Hardy { .. } => unreachable!("guarded by caller"),
    };
    let len = problem.interval.1 - problem.interval.0;
    let (u, du) = shoot(a, c, lambda, problem.left, len);
    match problem.right {
        EndCondition::Dirichlet => u,
        EndCondition::Robin(r) => a * du + r * u,
    }
}

/// First eigenvalue of a constant-coefficient problem by bisection on the
/// characteristic equation, to absolute tolerance 1e-12.
pub fn eig1d_transcendental(problem: &Oracle1DProblem) -> Result<f64> {
    let (a, c) = match problem.family {
        CoefficientFamily::Constant { a, c } => (a, c),
        CoefficientFamily::Hardy { .. } => {
            return Err(Error::Misuse(
                "transcendental eigenvalues need constant coefficients".into(),
            ))
        }
    };
    let len = problem.interval.1 - problem.interval.0;
    let robin_drop = |e: EndCondition| match e {
        EndCondition::Robin(r) => r * r / a,
        EndCondition::Dirichlet => 0.0,
    };
    let mut lo = c - robin_drop(problem.left) - robin_drop(problem.right) - 1.0;
    let step = (a * (std::f64::consts::PI / len).powi(2) / 8.0).max(1e-3);
    let f_lo = characteristic(problem, lo);
    let mut hi = lo;
    let mut f_hi = f_lo;
    let mut bracketed = false;
    for _ in 0..200_000 {
        hi += step;
        f_hi = characteristic(problem, hi);
        if f_lo.signum() != f_hi.signum() || f_hi == 0.0 {
            bracketed = true;
            break;
        }
        lo = hi;
    }
    if !bracketed {
        return Err(Error::Bracketing { lo, hi });
    }
    let mut lo_b = hi - step;
    let mut hi_b = hi;
    let mut f_lo_b = characteristic(problem, lo_b);
    for _ in 0..200 {
        let mid = 0.5 * (lo_b + hi_b);
        let f_mid = characteristic(problem, mid);
        if f_mid == 0.0 || hi_b - lo_b < 1e-12 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo_b.signum() {
            lo_b = mid;
            f_lo_b = f_mid;
        } else {
            hi_b = mid;
        }
        let _ = f_hi;
    }
    Ok(0.5 * (lo_b + hi_b))
}

/// Solution basis for `-u'' + (c/a) u = 0` style problems: value and
/// derivative of the two fundamental solutions at `x`.
fn hardy_basis(mu: f64, x: f64) -> Result<([f64; 2], [f64; 2])> {
    if mu > 0.25 {
        return Err(Error::Misuse(
            "no positive solution basis for mu > 1/4".into(),
        ));
    }
    if (mu - 0.25).abs() <= 1e-14 {
        let f = [x.sqrt(), x.sqrt() * x.ln()];
        let df = [0.5 / x.sqrt(), (0.5 * x.ln() + 1.0) / x.sqrt()];
        Ok((f, df))
    } else {
        let nu = (0.25 - mu).sqrt();
        let (sp, sm) = (0.5 + nu, 0.5 - nu);
        let f = [x.powf(sp), x.powf(sm)];
        let df = [sp * x.powf(sp - 1.0), sm * x.powf(sm - 1.0)];
        Ok((f, df))
    }
}

fn constant_basis(a: f64, c: f64, x: f64) -> ([f64; 2], [f64; 2]) {
    let q = c / a;
    if q > 1e-14 {
        let m = q.sqrt();
        (
            [(m * x).cosh(), (m * x).sinh()],
            [m * (m * x).sinh(), m * (m * x).cosh()],
        )
    } else if q < -1e-14 {
        let w = (-q).sqrt();
        (
            [(w * x).cos(), (w * x).sin()],
            [-w * (w * x).sin(), w * (w * x).cos()],
        )
    } else {
        ([1.0, x], [0.0, 1.0])
    }
}

/// Green kernel of the problem at `lambda = 0` from the classical
/// two-solution construction `G(x, y) = u_L(min) u_R(max) / (a W)`.
pub fn green1d(problem: &Oracle1DProblem, x: f64, y: f64) -> Result<f64> {
    let (alpha, beta) = problem.interval;
    let inside = |t: f64| t >= alpha && t <= beta;
    if !inside(x) || !inside(y) {
        return Err(Error::Misuse("green1d probe outside the interval".into()));
    }
    let a = match problem.family {
        CoefficientFamily::Constant { a, .. } => a,
        CoefficientFamily::Hardy { .. } => 1.0,
    };
    let basis = |t: f64| -> Result<([f64; 2], [f64; 2])> {
        match problem.family {
            CoefficientFamily::Constant { a, c } => Ok(constant_basis(a, c, t)),
            CoefficientFamily::Hardy { mu } => hardy_basis(mu, t),
        }
    };
    // u_L = c1 f1 + c2 f2 annihilating the left condition, likewise u_R.
    let (f_a, df_a) = basis(alpha)?;
    let left_coeff = match problem.left {
        EndCondition::Dirichlet => [f_a[1], -f_a[0]],
        EndCondition::Robin(r) => [
            df_a[1] - r / a * f_a[1],
            -(df_a[0] - r / a * f_a[0]),
        ],
    };
    let (f_b, df_b) = basis(beta)?;
    let right_coeff = match problem.right {
        EndCondition::Dirichlet => [f_b[1], -f_b[0]],
        EndCondition::Robin(r) => [
            df_b[1] + r / a * f_b[1],
            -(df_b[0] + r / a * f_b[0]),
        ],
    };
    let eval = |coeff: [f64; 2], t: f64| -> Result<(f64, f64)> {
        let (f, df) = basis(t)?;
        Ok((
            coeff[0] * f[0] + coeff[1] * f[1],
            coeff[0] * df[0] + coeff[1] * df[1],
        ))
    };
    let t = 0.5 * (alpha + beta);
    let (ul, dul) = eval(left_coeff, t)?;
    let (ur, dur) = eval(right_coeff, t)?;
    let wronskian = dul * ur - ul * dur;
    let scale = (ul.abs() + dul.abs()) * (ur.abs() + dur.abs());
    if wronskian.abs() <= 1e-14 * scale.max(1e-300) {
        return Err(Error::DegeneratePair { angle: 0.0 });
    }
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let (ul_lo, _) = eval(left_coeff, lo)?;
    let (ur_hi, _) = eval(right_coeff, hi)?;
    Ok(ul_lo * ur_hi / (a * wronskian))
}

/// Dense spectrum and inverse of a small assembled system.
pub struct DenseReference {
    /// Generalized eigenvalues of `(K, M)` as `(re, im)`, sorted by real
    /// part.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Dense inverse of `K`.
    pub inverse: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

impl DenseReference {
    /// Smallest real part over the whole spectrum.
    pub fn smallest_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| e.0)
            .fold(f64::INFINITY, f64::min)
    }
}

pub const DENSE_ORACLE_CAP: usize = 400;

pub fn dense_reference(system: &AssembledSystem) -> Result<DenseReference> {
    let n = system.n_free();
    if n > DENSE_ORACLE_CAP {
        return Err(Error::SizeCap { size: n, cap: DENSE_ORACLE_CAP });
    }
    let k = system.stiffness.to_dense();
    let m = system.mass.to_dense();
    let chol = nalgebra::Cholesky::new(m.clone())
        .ok_or_else(|| Error::Numerical("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let li_k = l
        .solve_lower_triangular(&k)
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&li_k.transpose())
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?
        .transpose();
    let mut eigenvalues: Vec<(f64, f64)> = c
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let inverse = k
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("stiffness matrix is singular".into()))?;
    Ok(DenseReference { eigenvalues, inverse, stiffness: k, mass: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_dirichlet_on_pi_is_one() {
        let p = Oracle1DProblem::new(
            CoefficientFamily::Constant { a: 1.0, c: 0.0 },
            (0.0, PI),
            EndCondition::Dirichlet,
            EndCondition::Dirichlet,
        )
        .unwrap();
        let lambda = eig1d_transcendental(&p).unwrap();
        assert!((lambda - 1.0).abs() < 1e-11, "{lambda}");
    }

    #[test]
    fn neumann_dirichlet_on_unit_is_pi_sq_over_4() {
        let p = Oracle1DProblem::new(
            CoefficientFamily::Constant { a: 1.0, c: 0.0 },
            (0.0, 1.0),
            EndCondition::Robin(0.0),
            EndCondition::Dirichlet,
        )
        .unwrap();
        let lambda = eig1d_transcendental(&p).unwrap();
        assert!((lambda - PI * PI / 4.0).abs() < 1e-11, "{lambda}");
    }

    #[test]
    fn robin_one_dirichlet_root_of_tan() {
        let p = Oracle1DProblem::new(
            CoefficientFamily::Constant { a: 1.0, c: 0.0 },
            (0.0, 1.0),
            EndCondition::Robin(1.0),
            EndCondition::Dirichlet,
        )
        .unwrap();
        let lambda = eig1d_transcendental(&p).unwrap();
        // s^2 with s the first root of tan s = -s in (pi/2, pi)
        let mut lo = PI / 2.0 + 1e-9;
        let mut hi = PI - 1e-9;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.tan() + mid > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        assert!((lambda - s * s).abs() < 1e-9, "{lambda} vs {}", s * s);
        assert!((lambda - 4.115858).abs() < 1e-5);
    }

    #[test]
    fn shifted_potential_moves_eigenvalue() {
        let p = Oracle1DProblem::new(
            CoefficientFamily::Constant { a: 1.0, c: -5.0 },
            (0.0, PI),
            EndCondition::Dirichlet,
            EndCondition::Dirichlet,
        )
        .unwrap();
        let lambda = eig1d_transcendental(&p).unwrap();
        assert!((lambda + 4.0).abs() < 1e-11);
    }

    #[test]
    fn green_dirichlet_dirichlet_product_formula() {
        let p = Oracle1DProblem::new(
            CoefficientFamily::Constant { a: 1.0, c: 0.0 },
            (0.0, 1.0),
            EndCondition::Dirichlet,
            EndCondition::Dirichlet,
        )
        .unwrap();
        let g = green1d(&p, 0.25, 0.5).unwrap();
        assert!((g - 0.125).abs() < 1e-14);
        // symmetry of the formula
        assert_eq!(g, green1d(&p, 0.5, 0.25).unwrap());
    }

    #[test]
    fn green_neumann_dirichlet_one_minus_max() {
        let p = Oracle1DProblem::new(
            CoefficientFamily::Constant { a: 1.0, c: 0.0 },
            (0.0, 1.0),
            EndCondition::Robin(0.0),
            EndCondition::Dirichlet,
        )
        .unwrap();
        let g = green1d(&p, 0.25, 0.5).unwrap();
        assert!((g - 0.5).abs() < 1e-14);
    }

    #[test]
    fn hardy_quarter_basis_solves_equation() {
        // finite-difference check that sqrt(x) and sqrt(x) ln x solve
        // -u'' = u / (4 x^2)
        for x in [0.5, 1.0, 2.0, 4.0] {
            let h = 1e-5;
            for pick in 0..2 {
                let u = |t: f64| {
                    let (f, _) = hardy_basis(0.25, t).unwrap();
                    f[pick]
                };
                let d2 = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
                let rhs = -u(x) / (4.0 * x * x);
                assert!((d2 - rhs).abs() < 1e-5, "x={x} pick={pick}");
            }
        }
    }

    #[test]
    fn hardy_green_from_two_solutions() {
        let p = Oracle1DProblem::new(
            CoefficientFamily::Hardy { mu: 0.25 },
            (0.01, 10.0),
            EndCondition::Dirichlet,
            EndCondition::Dirichlet,
        )
        .unwrap();
        let g = green1d(&p, 1.0, 2.0).unwrap();
        // independent evaluation of the closed form:
        // u_L = sqrt(x) ln(x/a), u_R = sqrt(x) ln(b/x), W from any point.
        let (a, b) = (0.01, 10.0);
        let ul = |x: f64| x.sqrt() * (x / a).ln();
        let ur = |x: f64| x.sqrt() * (b / x).ln();
        let x = 1.7;
        let dul = (ul(x + 1e-6) - ul(x - 1e-6)) / 2e-6;
        let dur = (ur(x + 1e-6) - ur(x - 1e-6)) / 2e-6;
        let w = dul * ur(x) - ul(x) * dur;
        let g_ref = ul(1.0) * ur(2.0) / w;
        assert!((g - g_ref).abs() < 1e-6, "{g} vs {g_ref}");
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(Oracle1DProblem::new(
            CoefficientFamily::Constant { a: 1.0, c: 0.0 },
            (1.0, 1.0),
            EndCondition::Dirichlet,
            EndCondition::Dirichlet,
        )
        .is_err());
    }
}
