//! Linear solves, the principal eigenpair, the spectral quantities of the
//! assembled operator, maximum-principle checking, and the discrete
//! sup-inf lower bound for the generalized principal eigenvalue.

use rand::{Rng, SeedableRng};

use crate::discretize::{
    assemble, estimate_coercive_shift, weighted_mass, AssembledSystem, FEFunction,
};
use crate::error::{Error, Result};
use crate::geometry::{make_exhaustion, ExhaustionSpec};
use crate::operator::{OperatorSpec, ScalarField};
use crate::pencil;
use crate::sparse::{norm2, CsrMatrix, ProfileLu};

/// Default tolerance on Rayleigh increments and eigen residuals.
pub const EIGEN_TOL: f64 = 1e-10;
pub const EIGEN_MAX_ITER: usize = 10_000;
const PIVOT_TOL: f64 = 1e-13;

/// Principal eigenvalue with positive, mass-normalized eigenfunction.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    pub eigenfunction: FEFunction,
    /// `||K u - lambda M u||_2 / ||u||_2`
    pub residual: f64,
    pub iterations: usize,
}

/// The four spectral quantities of a single assembled system.
#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub lambda_c: f64,
    /// Exhaustion-limit estimate; equals `lambda_c` on a single bounded
    /// domain.
    pub lambda_0: f64,
    /// Bottom of the spectrum; reported equal to `lambda_c`.
    pub gamma: f64,
    /// Rayleigh bound from the symmetric part.
    pub lambda_sym: f64,
    /// Sup-inf lower bound evaluated at the principal eigenfunction.
    pub pw_bound: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl SpectralReport {
    pub fn to_text(&self) -> String {
        format!(
            "lambda_c = {}\nlambda_0 = {}\ngamma = {}\nLambda = {}\npw_bound = {}\nresidual = {}\niterations = {}\n",
            self.lambda_c,
            self.lambda_0,
            self.gamma,
            self.lambda_sym,
            self.pw_bound,
            self.residual,
            self.iterations
        )
    }
}

/// Is the assembled stiffness symmetric to working precision?
pub fn stiffness_is_symmetric(system: &AssembledSystem) -> bool {
    let k = &system.stiffness;
    let diff = k.add_scaled(&k.transpose(), -1.0);
    diff.max_abs() <= 1e-10 * k.max_abs().max(f64::MIN_POSITIVE)
}

/// Solves `(K - lam M) u = M rhs` by direct factorization, verifying the
/// relative residual to 1e-10 (with one refinement sweep).
pub fn shifted_solve(
    system: &AssembledSystem,
    lam: f64,
    rhs: &FEFunction,
) -> Result<FEFunction> {
    if rhs.len() != system.n_free() {
        return Err(Error::SizeMismatch { expected: system.n_free(), got: rhs.len() });
    }
    let shifted = system.stiffness.add_scaled(&system.mass, -lam);
    let lu = ProfileLu::factor(&shifted, PIVOT_TOL).map_err(|e| match e {
        Error::ResolventAtSpectrum { pivot, .. } => {
            Error::ResolventAtSpectrum { shift: lam, pivot }
        }
        other => other,
    })?;
    let load = system.mass.matvec(&rhs.coeffs);
    let mut u = lu.solve(&load);
    let load_norm = norm2(&load);
    if load_norm == 0.0 {
        return Ok(FEFunction { coeffs: vec![0.0; u.len()] });
    }
    for _ in 0..2 {
        let mut r = shifted.matvec(&u);
        for (ri, li) in r.iter_mut().zip(&load) {
            *ri = li - *ri;
        }
        if norm2(&r) <= 1e-10 * load_norm {
            return Ok(FEFunction { coeffs: u });
        }
        let du = lu.solve(&r);
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui += di;
        }
    }
    let mut r = shifted.matvec(&u);
    for (ri, li) in r.iter_mut().zip(&load) {
        *ri = li - *ri;
    }
    let rel = norm2(&r) / load_norm;
    if rel <= 1e-10 {
        Ok(FEFunction { coeffs: u })
    } else {
        // A direct solve whose refined residual will not drop is the
        // signature of a (numerically) singular shift.
        Err(Error::ResolventAtSpectrum { shift: lam, pivot: lu.min_abs_pivot() })
    }
}

fn principal_of_matrix(
    k: &CsrMatrix,
    system: &AssembledSystem,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair> {
    let gamma = estimate_coercive_shift(system)?;
    let symmetric = {
        let diff = k.add_scaled(&k.transpose(), -1.0);
        diff.max_abs() <= 1e-10 * k.max_abs().max(f64::MIN_POSITIVE)
    };
    let sol = pencil::positive_principal_pencil(
        k,
        &system.mass,
        Some(gamma),
        tol,
        max_iter,
        symmetric,
    )?;
    if let Some(i) = sol.vector.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Positivity(format!(
            "principal eigenfunction vanishes at free node {i}"
        )));
    }
    let u_norm = norm2(&sol.vector);
    Ok(EigenPair {
        lambda: sol.lambda,
        eigenfunction: FEFunction { coeffs: sol.vector },
        residual: sol.residual / u_norm.max(f64::MIN_POSITIVE),
        iterations: sol.iterations,
    })
}

/// Principal eigenpair of `(K, M)` by inverse power iteration on
/// `(K + gamma_m M)^{-1} M` with entrywise positivity clamping, started from
/// the all-ones vector. Returns the eigenvalue, the positive eigenfunction
/// normalized to unit mass norm, the residual, and the iteration count.
pub fn principal_eigen(
    system: &AssembledSystem,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair> {
    principal_of_matrix(&system.stiffness, system, tol, max_iter)
}

/// Principal eigenpair of the transposed stiffness (the discrete adjoint).
/// The transpose has the same spectrum, so the eigenvalue is checked to
/// agree with the primal one within `2 * tol`.
pub fn adjoint_principal_eigen(
    system: &AssembledSystem,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair> {
    let kt = system.stiffness.transpose();
    let pair = principal_of_matrix(&kt, system, tol, max_iter)?;
    let primal = principal_of_matrix(&system.stiffness, system, tol, max_iter)?;
    let scale = pair.lambda.abs().max(1.0);
    if (pair.lambda - primal.lambda).abs() > 2.0 * tol * scale {
        return Err(Error::Numerical(format!(
            "adjoint eigenvalue {} disagrees with primal {}",
            pair.lambda, primal.lambda
        )));
    }
    Ok(pair)
}

/// Smallest eigenvalue of the symmetric part `(K + K^T)/2` relative to `M`.
pub fn rayleigh_lambda(system: &AssembledSystem) -> Result<f64> {
    let sym = system.stiffness.symmetric_part();
    let sol = pencil::smallest_sym_pencil(&sym, &system.mass, EIGEN_TOL, EIGEN_MAX_ITER)?;
    Ok(sol.lambda)
}

/// Outcome of the randomized maximum-principle check.
#[derive(Clone, Debug)]
pub enum MaxPrincipleVerdict {
    Holds,
    Violated(MaxPrincipleWitness),
}

#[derive(Clone, Debug)]
pub struct MaxPrincipleWitness {
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
    pub min_value: f64,
    pub node: usize,
}

/// Draws `trials` random nonnegative right-hand sides, solves
/// `(K - lam M) u = M rhs`, and reports a violation witness when some
/// solution dips below `-1e-8 * max|u|`.
pub fn check_max_principle(
    system: &AssembledSystem,
    lam: f64,
    trials: usize,
) -> Result<MaxPrincipleVerdict> {
    let shifted = system.stiffness.add_scaled(&system.mass, -lam);
    let lu = ProfileLu::factor(&shifted, PIVOT_TOL).map_err(|e| match e {
        Error::ResolventAtSpectrum { pivot, .. } => {
            Error::ResolventAtSpectrum { shift: lam, pivot }
        }
        other => other,
    })?;
    let n = system.n_free();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x3a5f_9b2d);
    for _ in 0..trials {
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let u = lu.solve(&system.mass.matvec(&rhs));
        let max_abs = u.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let (node, &min_value) = u
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty system");
        if min_value < -1e-8 * max_abs {
            return Ok(MaxPrincipleVerdict::Violated(MaxPrincipleWitness {
                rhs,
                solution: u,
                min_value,
                node,
            }));
        }
    }
    Ok(MaxPrincipleVerdict::Holds)
}

/// Discrete sup-inf bound: `min_i (K u)_i / (M_V u)_i` over the nonnegative
/// nodal basis. For any positive `u` this bounds the generalized principal
/// eigenvalue from below; at the principal eigenfunction it equals
/// `lambda_c`.
pub fn protter_weinberger(
    system: &AssembledSystem,
    u: &FEFunction,
    v_weight: &ScalarField,
) -> Result<f64> {
    if u.len() != system.n_free() {
        return Err(Error::SizeMismatch { expected: system.n_free(), got: u.len() });
    }
    if let Some(i) = u.coeffs.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Positivity(format!(
            "sup-inf bound needs u > 0 on free nodes; node {i}"
        )));
    }
    let m_v = weighted_mass(system, v_weight);
    let ku = system.stiffness.matvec(&u.coeffs);
    let mu = m_v.matvec(&u.coeffs);
    let mut bound = f64::INFINITY;
    for i in 0..u.len() {
        if mu[i] <= 0.0 {
            return Err(Error::Weight { node: i, value: mu[i] });
        }
        bound = bound.min(ku[i] / mu[i]);
    }
    Ok(bound)
}

/// The per-level principal eigenvalues of an exhaustion, their limit
/// estimate, and a one-step extrapolation.
#[derive(Clone, Debug)]
pub struct LambdaTrace {
    pub levels: Vec<(u32, f64)>,
    /// Last computed value.
    pub last: f64,
    /// Aitken extrapolation of the tail (falls back to `last`).
    pub richardson: f64,
}

impl LambdaTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,lambda_c_k,increment\n");
        let mut prev: Option<f64> = None;
        for &(k, v) in &self.levels {
            let inc = prev.map_or(0.0, |p| v - p);
            out.push_str(&format!("{k},{v},{inc}\n"));
            prev = Some(v);
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.levels.iter().map(|e| e.1).fold(f64::INFINITY, f64::min)
    }
}

/// Runs `principal_eigen` on every exhaustion level. The values must be
/// nonincreasing (violations beyond 1e-8 raise a consistency error; on
/// strictly growing windows they decrease strictly).
pub fn lambda0_exhaustion(
    ex: &ExhaustionSpec,
    op: &OperatorSpec,
    k_max: u32,
) -> Result<LambdaTrace> {
    if k_max < 2 {
        return Err(Error::Misuse("exhaustion traces need k_max >= 2".into()));
    }
    let mut levels = Vec::new();
    for k in 1..=k_max {
        let mesh = make_exhaustion(ex, k)?;
        let system = assemble(&mesh, op)?;
        let pair = principal_eigen(&system, EIGEN_TOL, EIGEN_MAX_ITER).map_err(|e| {
            Error::Numerical(format!("eigen solve failed at level {k}: {e}"))
        })?;
        if let Some(&(_, prev)) = levels.last() {
            if pair.lambda > prev + 1e-8 {
                return Err(Error::Consistency {
                    level: k as usize,
                    detail: format!(
                        "lambda_c increased from {prev} to {} along the exhaustion",
                        pair.lambda
                    ),
                });
            }
        }
        levels.push((k, pair.lambda));
    }
    let last = levels.last().unwrap().1;
    let richardson = if levels.len() >= 3 {
        let l = levels.len();
        let (a, b, c) = (levels[l - 3].1, levels[l - 2].1, levels[l - 1].1);
        let d1 = b - a;
        let d2 = c - b;
        if (d2 - d1).abs() > 1e-300 {
            c - d2 * d2 / (d2 - d1)
        } else {
            last
        }
    } else {
        last
    };
    Ok(LambdaTrace { levels, last, richardson })
}

/// Full spectral report for one assembled system, treated as its own
/// (trivial) exhaustion level.
pub fn spectral_report(
    system: &AssembledSystem,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralReport> {
    let pair = principal_eigen(system, tol, max_iter)?;
    let lambda_sym = rayleigh_lambda(system)?;
    let pw_bound = protter_weinberger(system, &pair.eigenfunction, &system.spec.weight)?;
    Ok(SpectralReport {
        lambda_c: pair.lambda,
        lambda_0: pair.lambda,
        gamma: pair.lambda,
        lambda_sym,
        pw_bound,
        residual: pair.residual,
        iterations: pair.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_interval_mesh, tag_boundary, BoundaryMarker, DomainSpec, Growth, Shape, WindowRule,
    };
    use crate::geometry::MeshRule;
    use crate::operator::{constant_vector, CoefficientSet, RobinData};
    use std::f64::consts::PI;

    fn interval_system(
        a: f64,
        b: f64,
        n: usize,
        robin: BoundaryMarker,
        spec: &OperatorSpec,
    ) -> AssembledSystem {
        let domain = DomainSpec::new(Shape::Interval { a, b }, robin).unwrap();
        let mesh = tag_boundary(&build_interval_mesh(a, b, n).unwrap(), &domain).unwrap();
        assemble(&mesh, spec).unwrap()
    }

    #[test]
    fn poisson_solution_matches_closed_form() {
        // -u'' = 1 on (0,1), Dirichlet: u = x(1-x)/2
        let sys = interval_system(0.0, 1.0, 64, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let rhs = FEFunction::ones(sys.n_free());
        let u = shifted_solve(&sys, 0.0, &rhs).unwrap();
        let h = 1.0 / 64.0;
        for (i, &v) in sys.free_map.free_to_vertex.iter().enumerate() {
            let x = sys.mesh.vertices[v].x;
            let exact = 0.5 * x * (1.0 - x);
            assert!((u.coeffs[i] - exact).abs() <= h * h, "x={x}");
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let sys = interval_system(0.0, 1.0, 16, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let u = shifted_solve(&sys, 0.0, &FEFunction::zeros(sys.n_free())).unwrap();
        assert!(u.coeffs.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn solve_at_eigenvalue_reports_spectrum() {
        let sys = interval_system(0.0, PI, 200, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let pair = principal_eigen(&sys, 1e-12, EIGEN_MAX_ITER).unwrap();
        let err = shifted_solve(&sys, pair.lambda, &FEFunction::ones(sys.n_free()));
        assert!(matches!(err, Err(Error::ResolventAtSpectrum { .. })));
    }

    #[test]
    fn principal_eigen_dirichlet_laplacian() {
        let sys = interval_system(0.0, PI, 1000, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let pair = principal_eigen(&sys, EIGEN_TOL, EIGEN_MAX_ITER).unwrap();
        assert!((pair.lambda - 1.0).abs() < 1e-3, "{}", pair.lambda);
        // eigenfunction proportional to sin(x)
        let mid = sys.mesh.nearest_vertex(crate::geometry::Point::on_axis(PI / 2.0));
        let quarter = sys.mesh.nearest_vertex(crate::geometry::Point::on_axis(PI / 4.0));
        let ratio = sys.vertex_value(&pair.eigenfunction, quarter)
            / sys.vertex_value(&pair.eigenfunction, mid);
        assert!((ratio - (PI / 4.0).sin()).abs() < 1e-3);
        assert!(pair.eigenfunction.coeffs.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn principal_eigen_neumann_dirichlet() {
        let spec = OperatorSpec::laplace(1).with_robin(RobinData::with_ratio(0.0));
        let sys = interval_system(0.0, 1.0, 1000, BoundaryMarker::Left, &spec);
        let pair = principal_eigen(&sys, EIGEN_TOL, EIGEN_MAX_ITER).unwrap();
        assert!((pair.lambda - PI * PI / 4.0).abs() < 1e-3, "{}", pair.lambda);
    }

    #[test]
    fn principal_eigen_robin_dirichlet() {
        let spec = OperatorSpec::laplace(1).with_robin(RobinData::with_ratio(1.0));
        let sys = interval_system(0.0, 1.0, 1000, BoundaryMarker::Left, &spec);
        let pair = principal_eigen(&sys, EIGEN_TOL, EIGEN_MAX_ITER).unwrap();
        assert!((pair.lambda - 4.115858).abs() < 2e-3, "{}", pair.lambda);
    }

    #[test]
    fn adjoint_spectrum_matches_and_vectors_differ() {
        let spec = OperatorSpec::new(
            CoefficientSet::laplacian(1).with_div_drift(constant_vector([1.0, 0.0])),
            RobinData::homogeneous(),
        );
        let sys = interval_system(0.0, 1.0, 200, BoundaryMarker::None, &spec);
        let pair = principal_eigen(&sys, 1e-11, EIGEN_MAX_ITER).unwrap();
        let adj = adjoint_principal_eigen(&sys, 1e-11, EIGEN_MAX_ITER).unwrap();
        assert!((pair.lambda - adj.lambda).abs() < 1e-8 * pair.lambda.abs().max(1.0));
        let cos = crate::sparse::dot(&pair.eigenfunction.coeffs, &adj.eigenfunction.coeffs)
            / (norm2(&pair.eigenfunction.coeffs) * norm2(&adj.eigenfunction.coeffs));
        assert!(cos < 1.0 - 1e-6, "cosine similarity {cos}");
    }

    #[test]
    fn rayleigh_bound_symmetric_equals_lambda_c() {
        let sys = interval_system(0.0, PI, 400, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let pair = principal_eigen(&sys, 1e-12, EIGEN_MAX_ITER).unwrap();
        let lam = rayleigh_lambda(&sys).unwrap();
        assert!((lam - pair.lambda).abs() < 1e-6);
    }

    #[test]
    fn rayleigh_bound_drops_under_drift() {
        // grad-slot drift: Lambda stays at the symmetric bottom while
        // lambda_c rises by |b|^2/4
        let spec = OperatorSpec::new(
            CoefficientSet::laplacian(1).with_grad_drift(constant_vector([1.0, 0.0])),
            RobinData::homogeneous(),
        );
        let sys = interval_system(0.0, PI, 400, BoundaryMarker::None, &spec);
        let pair = principal_eigen(&sys, 1e-11, EIGEN_MAX_ITER).unwrap();
        let lam = rayleigh_lambda(&sys).unwrap();
        assert!(lam <= pair.lambda - 0.01, "Lambda {lam} vs lambda_c {}", pair.lambda);
        assert!((pair.lambda - 1.25).abs() < 1e-2);
    }

    #[test]
    fn rayleigh_shift_linearity() {
        let base = interval_system(0.0, PI, 200, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let shifted = interval_system(
            0.0,
            PI,
            200,
            BoundaryMarker::None,
            &OperatorSpec::laplace(1).shifted(5.0),
        );
        let l0 = rayleigh_lambda(&base).unwrap();
        let l5 = rayleigh_lambda(&shifted).unwrap();
        assert!((l0 - l5 - 5.0).abs() < 1e-8);
    }

    #[test]
    fn max_principle_holds_below_lambda_c() {
        let sys = interval_system(0.0, PI, 60, BoundaryMarker::None, &OperatorSpec::laplace(1));
        match check_max_principle(&sys, 0.0, 100).unwrap() {
            MaxPrincipleVerdict::Holds => {}
            MaxPrincipleVerdict::Violated(w) => panic!("violated: {w:?}"),
        }
    }

    #[test]
    fn max_principle_fails_between_eigenvalues() {
        let sys = interval_system(0.0, PI, 60, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let pair = principal_eigen(&sys, 1e-11, EIGEN_MAX_ITER).unwrap();
        match check_max_principle(&sys, pair.lambda + 0.5, 100).unwrap() {
            MaxPrincipleVerdict::Violated(w) => {
                assert!(w.min_value < 0.0);
            }
            MaxPrincipleVerdict::Holds => panic!("expected a violation witness"),
        }
    }

    #[test]
    fn sup_inf_at_eigenfunction_is_lambda_c() {
        let sys = interval_system(0.0, PI, 300, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let pair = principal_eigen(&sys, 1e-13, 20_000).unwrap();
        let bound =
            protter_weinberger(&sys, &pair.eigenfunction, &sys.spec.weight).unwrap();
        assert!((bound - pair.lambda).abs() < 1e-6, "{bound} vs {}", pair.lambda);
    }

    #[test]
    fn sup_inf_at_plateau_vanishes() {
        // u = 1 on free nodes: K u = 0 on interior rows, positive spikes at
        // boundary-adjacent rows, so the infimum is 0 <= lambda_c.
        let sys = interval_system(0.0, PI, 10, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let bound =
            protter_weinberger(&sys, &FEFunction::ones(sys.n_free()), &sys.spec.weight).unwrap();
        assert!(bound.abs() <= 1e-12);
    }

    #[test]
    fn lambda0_trace_half_line() {
        let base = DomainSpec::new(
            Shape::Interval { a: 0.0, b: f64::INFINITY },
            BoundaryMarker::None,
        )
        .unwrap();
        let ex = ExhaustionSpec::new(
            base,
            WindowRule::Interval {
                left: Growth::Fixed(0.0),
                right: Growth::Geometric { scale: 1.0, ratio: 2.0 },
            },
            MeshRule::FixedH(0.02),
        );
        let trace = lambda0_exhaustion(&ex, &OperatorSpec::laplace(1), 6).unwrap();
        for window in trace.levels.windows(2) {
            assert!(window[1].1 < window[0].1 - 1e-10, "strictly decreasing");
        }
        for &(k, lam) in &trace.levels {
            let len = 2.0f64.powi(k as i32);
            let exact = (PI / len).powi(2);
            assert!((lam - exact).abs() < 0.05 * exact + 1e-6, "k={k}: {lam} vs {exact}");
        }
        assert!(trace.last < 3e-3);
        assert!(trace.richardson.abs() < 1e-3);
    }
}
