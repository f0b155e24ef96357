//! Coefficient data for the operator pair: a divergence-form elliptic
//! operator with two drift slots and a potential, plus Robin boundary data.
//!
//! All coefficient fields are samplable functions of position. Evaluation
//! must be pure: the same point always yields the same value. Supplied
//! functions must be finite at the quadrature points of any mesh they are
//! assembled on.

use std::sync::Arc;

use crate::discretize::AssembledSystem;
use crate::error::{Error, Result};
use crate::geometry::Point;

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(Point) -> [[f64; 2]; 2] + Send + Sync>;

pub fn constant_scalar(value: f64) -> ScalarField {
    Arc::new(move |_| value)
}

pub fn constant_vector(v: [f64; 2]) -> VectorField {
    Arc::new(move |_| v)
}

pub fn identity_matrix_field() -> MatrixField {
    Arc::new(|_| [[1.0, 0.0], [0.0, 1.0]])
}

/// Diffusion matrix, two drift fields, and potential.
///
/// `div_drift` sits inside the divergence, `grad_drift` multiplies the
/// gradient. Swapping them gives the formal adjoint.
#[derive(Clone)]
pub struct CoefficientSet {
    pub dim: usize,
    pub diffusion: MatrixField,
    pub div_drift: VectorField,
    pub grad_drift: VectorField,
    pub potential: ScalarField,
    /// Claimed ellipticity bound; advisory.
    pub theta_hint: Option<f64>,
}

impl CoefficientSet {
    pub fn laplacian(dim: usize) -> Self {
        CoefficientSet {
            dim,
            diffusion: identity_matrix_field(),
            div_drift: constant_vector([0.0, 0.0]),
            grad_drift: constant_vector([0.0, 0.0]),
            potential: constant_scalar(0.0),
            theta_hint: Some(1.0),
        }
    }

    pub fn with_potential(mut self, c: ScalarField) -> Self {
        self.potential = c;
        self
    }

    pub fn with_div_drift(mut self, b: VectorField) -> Self {
        self.div_drift = b;
        self
    }

    pub fn with_grad_drift(mut self, b: VectorField) -> Self {
        self.grad_drift = b;
        self
    }
}

/// Robin data: `beta > 0` and `gamma` with `gamma/beta` bounded on compact
/// Robin patches. Only the ratio enters the weak form.
#[derive(Clone)]
pub struct RobinData {
    pub beta: ScalarField,
    pub gamma: ScalarField,
}

impl RobinData {
    pub fn homogeneous() -> Self {
        RobinData { beta: constant_scalar(1.0), gamma: constant_scalar(0.0) }
    }

    pub fn with_ratio(ratio: f64) -> Self {
        RobinData { beta: constant_scalar(1.0), gamma: constant_scalar(ratio) }
    }
}

/// Full operator data, including the spectral-family shift: the assembled
/// operator is `P - shift * V`.
#[derive(Clone)]
pub struct OperatorSpec {
    pub coefficients: CoefficientSet,
    pub robin: RobinData,
    pub shift: f64,
    pub weight: ScalarField,
}

impl OperatorSpec {
    pub fn new(coefficients: CoefficientSet, robin: RobinData) -> Self {
        OperatorSpec { coefficients, robin, shift: 0.0, weight: constant_scalar(1.0) }
    }

    pub fn laplace(dim: usize) -> Self {
        Self::new(CoefficientSet::laplacian(dim), RobinData::homogeneous())
    }

    /// `P - lambda * V` with the current weight.
    pub fn shifted(mut self, lambda: f64) -> Self {
        self.shift += lambda;
        self
    }

    pub fn with_weight(mut self, v: ScalarField) -> Self {
        self.weight = v;
        self
    }

    pub fn with_robin(mut self, robin: RobinData) -> Self {
        self.robin = robin;
        self
    }

    pub fn dim(&self) -> usize {
        self.coefficients.dim
    }

    /// True when the two drift slots agree at every sample point.
    pub fn symmetric_at(&self, samples: &[Point]) -> bool {
        samples.iter().all(|&p| {
            let bt = (self.coefficients.div_drift)(p);
            let bb = (self.coefficients.grad_drift)(p);
            (bt[0] - bb[0]).abs() <= 1e-12 && (bt[1] - bb[1]).abs() <= 1e-12
        })
    }
}

/// Formal adjoint: the two drift slots exchange; diffusion, potential,
/// Robin data, shift and weight are unchanged. Involutive.
pub fn adjoint(spec: &OperatorSpec) -> OperatorSpec {
    let mut out = spec.clone();
    std::mem::swap(
        &mut out.coefficients.div_drift,
        &mut out.coefficients.grad_drift,
    );
    out
}

/// Estimated ellipticity bound: max over samples of
/// `max(lambda_max(A), 1 / lambda_min(A))`. Fails when `A` is not symmetric
/// positive definite at some sample.
pub fn check_ellipticity(coeffs: &CoefficientSet, samples: &[Point]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Misuse("ellipticity check needs sample points".into()));
    }
    let mut theta: f64 = 0.0;
    for &p in samples {
        let a = (coeffs.diffusion)(p);
        let (lo, hi) = if coeffs.dim == 1 {
            (a[0][0], a[0][0])
        } else {
            if (a[0][1] - a[1][0]).abs() > 1e-12 {
                return Err(Error::EllipticityViolation {
                    point: [p.x, p.y],
                    detail: format!("asymmetry {:.3e}", (a[0][1] - a[1][0]).abs()),
                });
            }
            let tr = a[0][0] + a[1][1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            (0.5 * (tr - disc), 0.5 * (tr + disc))
        };
        if lo <= 0.0 {
            return Err(Error::EllipticityViolation {
                point: [p.x, p.y],
                detail: format!("eigenvalue {lo} is not positive"),
            });
        }
        theta = theta.max(hi).max(1.0 / lo);
    }
    Ok(theta)
}

/// Discrete ground-state transform: congruence with `D = diag(u)` so that
/// `phi^T K^u psi = (D phi)^T K (D psi)` holds exactly at the nodal level.
pub fn ground_state_transform_matrices(
    system: &AssembledSystem,
    u: &[f64],
) -> Result<AssembledSystem> {
    if u.len() != system.n_free() {
        return Err(Error::SizeMismatch { expected: system.n_free(), got: u.len() });
    }
    if let Some(i) = u.iter().position(|&v| v <= 0.0) {
        return Err(Error::Positivity(format!(
            "ground-state transform needs u > 0 on free nodes; u[{i}] = {}",
            u[i]
        )));
    }
    let mut out = system.clone();
    out.stiffness = system.stiffness.diag_congruence(u);
    out.mass = system.mass.diag_congruence(u);
    out.robin_mass = system.robin_mass.diag_congruence(u);
    Ok(out)
}

/// Built-in named operators addressable from batch configs:
/// `laplace`, `hardy(mu)`, `drift(b)` or `drift(bx,by)`,
/// `shifted(base, lambda)`.
pub fn catalog(name: &str, dim: usize) -> Result<OperatorSpec> {
    let name = name.trim();
    let bad = |d: &str| Error::Config { key: "operator.name".into(), detail: d.into() };
    if name == "laplace" {
        return Ok(OperatorSpec::laplace(dim));
    }
    if let Some(args) = strip_call(name, "hardy") {
        let mu: f64 = args
            .trim()
            .parse()
            .map_err(|_| bad(&format!("bad hardy parameter `{args}`")))?;
        let c: ScalarField = Arc::new(move |p: Point| {
            let r2 = if dim == 1 { p.x * p.x } else { p.x * p.x + p.y * p.y };
            -mu / r2
        });
        return Ok(OperatorSpec::new(
            CoefficientSet::laplacian(dim).with_potential(c),
            RobinData::homogeneous(),
        ));
    }
    if let Some(args) = strip_call(name, "drift") {
        let parts: Vec<&str> = split_top_level(args);
        let mut b = [0.0, 0.0];
        if parts.is_empty() || parts.len() > 2 {
            return Err(bad("drift takes 1 or 2 components"));
        }
        for (i, s) in parts.iter().enumerate() {
            b[i] = s
                .trim()
                .parse()
                .map_err(|_| bad(&format!("bad drift component `{s}`")))?;
        }
        return Ok(OperatorSpec::new(
            CoefficientSet::laplacian(dim).with_div_drift(constant_vector(b)),
            RobinData::homogeneous(),
        ));
    }
    if let Some(args) = strip_call(name, "shifted") {
        let parts = split_top_level(args);
        if parts.len() != 2 {
            return Err(bad("shifted takes (base, lambda)"));
        }
        let base = catalog(parts[0], dim)?;
        let lambda: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| bad(&format!("bad shift `{}`", parts[1])))?;
        return Ok(base.shifted(lambda));
    }
    Err(bad(&format!("unknown operator `{name}`")))
}

/// Names and signatures understood by [`catalog`].
pub fn catalog_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("laplace", "negative Laplacian"),
        ("hardy(mu)", "laplace with potential -mu/|x|^2"),
        ("drift(b)", "laplace with constant divergence-slot drift b"),
        ("shifted(base, lambda)", "base operator minus lambda"),
    ]
}

fn strip_call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    let rest = s.strip_prefix(name)?.trim();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner)
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() {
        parts.push(s[start..].trim());
    }
    parts
}
