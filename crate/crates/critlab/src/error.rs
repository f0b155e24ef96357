//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
///
/// Numerical failures (`NonConvergence`, `ResolventAtSpectrum`) and
/// consistency failures (`Consistency`, `Transversality`) are kept apart
/// because batch jobs map them to different exit codes.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Degenerate or malformed geometry input (a >= b, self-intersecting
    /// polygon, disconnected window intersection, ...).
    InvalidGeometry(String),
    /// A boundary facet midpoint satisfies neither the Robin nor the
    /// Dirichlet predicate, or both.
    DecompositionViolation { point: [f64; 2], detail: String },
    /// A truncation facet meets a Robin facet at an angle below tolerance.
    Transversality { point: [f64; 2], angle: f64 },
    /// Diffusion matrix not symmetric positive definite at a sample point.
    EllipticityViolation { point: [f64; 2], detail: String },
    /// beta <= 0 at a Robin quadrature point.
    RobinData { point: [f64; 2] },
    /// An untagged facet reached assembly.
    UntaggedFacet { facet: usize },
    /// A quantity that must be strictly positive was not.
    Positivity(String),
    /// Factorization hit a pivot below threshold: the shift is (numerically)
    /// an eigenvalue.
    ResolventAtSpectrum { shift: f64, pivot: f64 },
    /// Iteration exceeded its budget; carries the last residual.
    NonConvergence { iterations: usize, residual: f64 },
    /// Generic numerical failure with context.
    Numerical(String),
    /// Monotonicity or interval-structure violation in an exhaustion trace.
    Consistency { level: usize, detail: String },
    /// Pole requested on (or snapping to) a Dirichlet vertex.
    PolePlacement { point: [f64; 2] },
    /// Operation requires lambda_c > 0 but the operator is not positive.
    NonpositiveOperator { lambda_c: f64 },
    /// Source annulus not resolved by the mesh.
    Resolution { level: usize, detail: String },
    /// Hardy-weight pair u, v is (numerically) parallel.
    DegeneratePair { angle: f64 },
    /// Operation requires a symmetric operator spec.
    SymmetryRequired(String),
    /// V-weighted mass produced a nonpositive denominator.
    Weight { node: usize, value: f64 },
    /// Caller violated a documented precondition.
    Misuse(String),
    /// Dense oracle size cap exceeded.
    SizeCap { size: usize, cap: usize },
    /// Bisection bracket contains no sign change.
    Bracketing { lo: f64, hi: f64 },
    /// Mismatched vector / matrix sizes.
    SizeMismatch { expected: usize, got: usize },
    /// Bad job configuration; carries the offending `section.key`.
    Config { key: String, detail: String },
    /// Filesystem failure while reading or writing artifacts.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGeometry(d) => write!(f, "invalid geometry: {d}"),
            Error::DecompositionViolation { point, detail } => write!(
                f,
                "boundary decomposition violated at ({}, {}): {detail}",
                point[0], point[1]
            ),
            Error::Transversality { point, angle } => write!(
                f,
                "cut facet tangent to Robin facet at ({}, {}): angle {angle:.3e} rad",
                point[0], point[1]
            ),
            Error::EllipticityViolation { point, detail } => write!(
                f,
                "ellipticity violated at ({}, {}): {detail}",
                point[0], point[1]
            ),
            Error::RobinData { point } => {
                write!(f, "beta <= 0 at Robin point ({}, {})", point[0], point[1])
            }
            Error::UntaggedFacet { facet } => write!(f, "boundary facet {facet} is untagged"),
            Error::Positivity(d) => write!(f, "positivity failure: {d}"),
            Error::ResolventAtSpectrum { shift, pivot } => write!(
                f,
                "resolvent at spectrum: shift {shift} hit pivot {pivot:.3e}"
            ),
            Error::NonConvergence { iterations, residual } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:.3e})"
            ),
            Error::Numerical(d) => write!(f, "numerical failure: {d}"),
            Error::Consistency { level, detail } => {
                write!(f, "consistency error at level {level}: {detail}")
            }
            Error::PolePlacement { point } => write!(
                f,
                "pole at ({}, {}) lies on a Dirichlet vertex",
                point[0], point[1]
            ),
            Error::NonpositiveOperator { lambda_c } => {
                write!(f, "operator not positive: lambda_c = {lambda_c}")
            }
            Error::Resolution { level, detail } => {
                write!(f, "mesh too coarse at level {level}: {detail}")
            }
            Error::DegeneratePair { angle } => {
                write!(f, "supersolution pair is parallel (angle {angle:.3e} rad)")
            }
            Error::SymmetryRequired(d) => write!(f, "symmetric operator required: {d}"),
            Error::Weight { node, value } => {
                write!(f, "nonpositive weighted mass {value:.3e} at node {node}")
            }
            Error::Misuse(d) => write!(f, "misuse: {d}"),
            Error::SizeCap { size, cap } => {
                write!(f, "dense oracle cap exceeded: {size} > {cap}")
            }
            Error::Bracketing { lo, hi } => {
                write!(f, "no sign change in bracket [{lo}, {hi}]")
            }
            Error::SizeMismatch { expected, got } => {
                write!(f, "size mismatch: expected {expected}, got {got}")
            }
            Error::Config { key, detail } => write!(f, "config error at `{key}`: {detail}"),
            Error::Io(d) => write!(f, "io error: {d}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
