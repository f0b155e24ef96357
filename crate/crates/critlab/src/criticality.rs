//! Classification of the operator on a domain as subcritical, critical, or
//! supercritical, with the supporting constructions: Hardy weights from
//! pairs of positive supersolutions, null sequences for symmetric
//! operators, ground states, and nonnegativity scans over a shift family.

use std::sync::Arc;

use crate::discretize::{
    assemble, assemble_load, mass_with_nodal_weight, weighted_mass, AssembledSystem, FEFunction,
};
use crate::error::{Error, Result};
use crate::geometry::{make_exhaustion, ExhaustionSpec, MeshedDomain, Point, Window};
use crate::green::{green_minimal_with, Dichotomy, DichotomyThresholds, DichotomyTrace};
use crate::operator::{OperatorSpec, ScalarField};
use crate::pencil;
use crate::sparse::{dot, norm2, ProfileLu};
use crate::spectral::{
    lambda0_exhaustion, principal_eigen, LambdaTrace, EIGEN_MAX_ITER, EIGEN_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Subcritical,
    Critical,
    Supercritical,
    Undecided,
}

/// Thresholds used by [`classify`]; calibrated on the desk cases and
/// recorded with every result. `Undecided` is a reachable, honest outcome.
#[derive(Clone, Copy, Debug)]
pub struct ClassifyThresholds {
    pub dichotomy: DichotomyThresholds,
    /// A symmetric critical verdict requires the final null-sequence
    /// minimum below this value.
    pub null_critical_max: f64,
    /// A symmetric subcritical verdict requires the final minimum at or
    /// above this value.
    pub null_subcritical_min: f64,
    /// lambda_c below this marks a supercritical level.
    pub supercritical_tol: f64,
    /// Lower bound for the Hardy-weight recheck eigenvalue.
    pub hardy_recheck_tol: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds {
            dichotomy: DichotomyThresholds::default(),
            null_critical_max: 0.15,
            null_subcritical_min: 0.1,
            supercritical_tol: -1e-8,
            hardy_recheck_tol: -1e-6,
        }
    }
}

/// Nodal Hardy weight recovered from two positive supersolutions, plus the
/// recheck eigenvalue of the reweighted operator.
#[derive(Clone, Debug)]
pub struct HardyWeight {
    /// Per mesh vertex (zero on elements touching constrained vertices).
    pub vertex_values: Vec<f64>,
    /// Principal eigenvalue of `P - W` on the same system.
    pub recheck_lambda_c: f64,
}

/// `W = 1/4 |grad log(v/u)|_A^2` from P1 gradients per element, lumped to
/// vertices by volume weights. The reweighted operator `P - W` is rechecked
/// for nonnegativity (principal eigenvalue at least -1e-6).
pub fn hardy_weight(
    u: &FEFunction,
    v: &FEFunction,
    system: &AssembledSystem,
) -> Result<HardyWeight> {
    let n = system.n_free();
    if u.len() != n || v.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: u.len().max(v.len()) });
    }
    for (name, f) in [("u", u), ("v", v)] {
        if let Some(i) = f.coeffs.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Positivity(format!(
                "hardy weight needs {name} > 0 on free nodes; node {i}"
            )));
        }
    }
    let cos = (dot(&u.coeffs, &v.coeffs) / (norm2(&u.coeffs) * norm2(&v.coeffs)))
        .clamp(-1.0, 1.0);
    let angle = cos.acos();
    if angle < 1e-6 {
        return Err(Error::DegeneratePair { angle });
    }
    let mesh = &system.mesh;
    let nv = mesh.vertices.len();
    let mut acc = vec![0.0f64; nv];
    let mut vol = vec![0.0f64; nv];
    for elem in &mesh.elements {
        let nodes = elem.nodes();
        // log(v/u) is undefined where the functions vanish (constrained
        // vertices); such elements contribute zero weight.
        let log_ratio: Option<Vec<f64>> = nodes
            .iter()
            .map(|&vtx| {
                system.free_map.vertex_to_free[vtx]
                    .map(|i| (v.coeffs[i] / u.coeffs[i]).ln())
            })
            .collect();
        let measure = mesh.element_measure(elem).abs();
        let share = measure / nodes.len() as f64;
        if let Some(l) = log_ratio {
            let w_elem = if mesh.dim == 1 {
                let (x0, x1) = (mesh.vertices[nodes[0]].x, mesh.vertices[nodes[1]].x);
                let g = (l[1] - l[0]) / (x1 - x0);
                let center = Point::on_axis(0.5 * (x0 + x1));
                let a = (system.spec.coefficients.diffusion)(center)[0][0];
                0.25 * a * g * g
            } else {
                let pts = [
                    mesh.vertices[nodes[0]],
                    mesh.vertices[nodes[1]],
                    mesh.vertices[nodes[2]],
                ];
                let area2 = 2.0 * measure;
                let mut grad = [0.0f64; 2];
                for i in 0..3 {
                    let pj = pts[(i + 1) % 3];
                    let pk = pts[(i + 2) % 3];
                    grad[0] += l[i] * (pj.y - pk.y) / area2;
                    grad[1] += l[i] * (pk.x - pj.x) / area2;
                }
                let center = Point::new(
                    (pts[0].x + pts[1].x + pts[2].x) / 3.0,
                    (pts[0].y + pts[1].y + pts[2].y) / 3.0,
                );
                let a = (system.spec.coefficients.diffusion)(center);
                let ag = [
                    a[0][0] * grad[0] + a[0][1] * grad[1],
                    a[1][0] * grad[0] + a[1][1] * grad[1],
                ];
                0.25 * (grad[0] * ag[0] + grad[1] * ag[1])
            };
            for &vtx in nodes {
                acc[vtx] += w_elem * share;
                vol[vtx] += share;
            }
        } else {
            for &vtx in nodes {
                vol[vtx] += share;
            }
        }
    }
    let vertex_values: Vec<f64> = acc
        .iter()
        .zip(&vol)
        .map(|(a, v)| if *v > 0.0 { a / v } else { 0.0 })
        .collect();
    let m_w = mass_with_nodal_weight(system, &vertex_values);
    let mut reweighted = system.clone();
    reweighted.stiffness = system.stiffness.add_scaled(&m_w, -1.0);
    let pair = principal_eigen(&reweighted, EIGEN_TOL, EIGEN_MAX_ITER)?;
    if pair.lambda < -1e-6 {
        return Err(Error::Consistency {
            level: 0,
            detail: format!(
                "hardy-weight recheck failed: lambda_c(P - W) = {}",
                pair.lambda
            ),
        });
    }
    Ok(HardyWeight { vertex_values, recheck_lambda_c: pair.lambda })
}

/// Axis-aligned probe window for null sequences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeWindow {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl ProbeWindow {
    pub fn interval(a: f64, b: f64) -> Self {
        ProbeWindow { x: (a, b), y: (f64::NEG_INFINITY, f64::INFINITY) }
    }

    pub fn rect(x: (f64, f64), y: (f64, f64)) -> Self {
        ProbeWindow { x, y }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x.0 && p.x <= self.x.1 && p.y >= self.y.0 && p.y <= self.y.1
    }

    fn indicator(&self) -> ScalarField {
        let w = *self;
        Arc::new(move |p: Point| if w.contains(p) { 1.0 } else { 0.0 })
    }
}

/// Per-level minima of the quadratic form over functions of unit L2 mass on
/// a fixed window.
#[derive(Clone, Debug)]
pub struct NullSequenceTrace {
    pub window: ProbeWindow,
    /// `(k, C_{O,k})`
    pub minima: Vec<(u32, f64)>,
    /// `|phi|` re-normalized, one per level.
    pub minimizers: Vec<FEFunction>,
}

impl NullSequenceTrace {
    pub fn final_minimum(&self) -> f64 {
        self.minima.last().map(|e| e.1).unwrap_or(f64::INFINITY)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,c_o_k\n");
        for &(k, c) in &self.minima {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }
}

fn symmetry_samples(mesh: &MeshedDomain) -> Vec<Point> {
    mesh.elements
        .iter()
        .take(64)
        .map(|e| {
            let nodes = e.nodes();
            let mut x = 0.0;
            let mut y = 0.0;
            for &v in nodes {
                x += mesh.vertices[v].x;
                y += mesh.vertices[v].y;
            }
            Point::new(x / nodes.len() as f64, y / nodes.len() as f64)
        })
        .collect()
}

/// Minimizes `phi^T K_k phi` subject to unit mass on the probe window, per
/// exhaustion level. Requires a symmetric operator; the sign constraint is
/// dropped and the returned minimizer re-positivized.
pub fn null_sequence(
    ex: &ExhaustionSpec,
    op: &OperatorSpec,
    window: ProbeWindow,
    k_max: u32,
) -> Result<NullSequenceTrace> {
    let mut minima = Vec::new();
    let mut minimizers = Vec::new();
    for k in 1..=k_max {
        let mesh = make_exhaustion(ex, k)?;
        if k == 1 && !op.symmetric_at(&symmetry_samples(&mesh)) {
            return Err(Error::SymmetryRequired(
                "null sequences are defined for symmetric operators".into(),
            ));
        }
        let system = assemble(&mesh, op)?;
        let pair = principal_eigen(&system, EIGEN_TOL, EIGEN_MAX_ITER)?;
        if pair.lambda < -1e-10 * system.stiffness.max_abs() {
            return Err(Error::NonpositiveOperator { lambda_c: pair.lambda });
        }
        let m_o = weighted_mass(&system, &window.indicator());
        if m_o.max_abs() == 0.0 {
            return Err(Error::Misuse(
                "probe window contains no quadrature mass".into(),
            ));
        }
        let sol =
            pencil::smallest_sym_pencil(&system.stiffness, &m_o, 1e-9, EIGEN_MAX_ITER)?;
        let mut phi: Vec<f64> = sol.vector.iter().map(|x| x.abs()).collect();
        let mass = m_o.bilinear(&phi, &phi).sqrt();
        for x in phi.iter_mut() {
            *x /= mass;
        }
        minima.push((k, sol.lambda));
        minimizers.push(FEFunction { coeffs: phi });
    }
    Ok(NullSequenceTrace { window, minima, minimizers })
}

/// Deterministic probe choice inside the first exhaustion level: pole at
/// the window center, normalization and Green probe along the widest axis,
/// and a null-sequence window around the normalization point.
pub struct Probes {
    pub x0: Point,
    pub y0: Point,
    pub x1: Point,
    pub window: ProbeWindow,
}

pub fn auto_probes(ex: &ExhaustionSpec) -> Result<Probes> {
    let w1 = ex.windows.window(1);
    let mesh1 = make_exhaustion(ex, 1)?;
    let (center, span_x, span_y) = match w1 {
        Window::Interval { lo, hi } => (Point::on_axis(0.5 * (lo + hi)), hi - lo, 0.0),
        Window::Box { x0, x1, y0, y1 } => (
            Point::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)),
            x1 - x0,
            y1 - y0,
        ),
    };
    let constrained = mesh1.constrained_vertices();
    let snap_free = |p: Point| -> Result<Point> {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (i, v) in mesh1.vertices.iter().enumerate() {
            if constrained[i] {
                continue;
            }
            let d = v.dist(&p);
            if d < best_d {
                best_d = d;
                best = Some(*v);
            }
        }
        best.ok_or_else(|| Error::Misuse("level 1 has no free vertices".into()))
    };
    let step = if span_y > span_x {
        Point::new(0.0, span_y / 4.0)
    } else {
        Point::new(span_x / 4.0, 0.0)
    };
    let x0 = snap_free(center)?;
    let x1 = snap_free(Point::new(center.x + step.x, center.y + step.y))?;
    let y0 = snap_free(Point::new(center.x + 0.5 * step.x, center.y + 0.5 * step.y))?;
    if x0.dist(&x1) <= 1e-12 || x0.dist(&y0) <= 1e-12 || y0.dist(&x1) <= 1e-12 {
        return Err(Error::Misuse(
            "level 1 too coarse to separate the classification probes".into(),
        ));
    }
    let r = 0.5 * step.x.hypot(step.y);
    let window = if span_y > 0.0 {
        ProbeWindow::rect((x1.x - r, x1.x + r), (x1.y - r, x1.y + r))
    } else {
        ProbeWindow::interval(x1.x - r, x1.x + r)
    };
    Ok(Probes { x0, y0, x1, window })
}

/// Full classification record: the verdict plus every trace that produced
/// it.
#[derive(Debug)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub lambda0_estimate: f64,
    pub lambda_trace: LambdaTrace,
    /// First level with `lambda_c` below the supercritical threshold.
    pub supercritical_witness: Option<(u32, f64)>,
    pub dichotomy: Option<DichotomyTrace>,
    /// Limit Green value at the probe pair (subcritical branch).
    pub green_value: Option<f64>,
    pub hardy: Option<HardyWeight>,
    pub null_trace: Option<NullSequenceTrace>,
    pub thresholds: ClassifyThresholds,
}

/// Classification pipeline: exhaustion eigenvalues first (any negative
/// level is a supercritical witness), then the Green dichotomy; symmetric
/// operators additionally carry a null-sequence trace that must agree with
/// the dichotomy verdict, otherwise the result is `Undecided`.
pub fn classify(
    ex: &ExhaustionSpec,
    op: &OperatorSpec,
    k_max: u32,
) -> Result<ClassificationResult> {
    classify_with(ex, op, k_max, ClassifyThresholds::default())
}

pub fn classify_with(
    ex: &ExhaustionSpec,
    op: &OperatorSpec,
    k_max: u32,
    thresholds: ClassifyThresholds,
) -> Result<ClassificationResult> {
    let mesh1 = make_exhaustion(ex, 1)?;
    let samples = symmetry_samples(&mesh1);
    if samples.iter().any(|&p| ((op.weight)(p) - 1.0).abs() > 1e-12) {
        return Err(Error::Misuse(
            "classification runs with unit weight V = 1".into(),
        ));
    }
    let lambda_trace = lambda0_exhaustion(ex, op, k_max)?;
    if let Some(&(k, lam)) = lambda_trace
        .levels
        .iter()
        .find(|&&(_, lam)| lam < thresholds.supercritical_tol)
    {
        return Ok(ClassificationResult {
            verdict: Verdict::Supercritical,
            lambda0_estimate: lambda_trace.richardson,
            supercritical_witness: Some((k, lam)),
            lambda_trace,
            dichotomy: None,
            green_value: None,
            hardy: None,
            null_trace: None,
            thresholds,
        });
    }
    let probes = auto_probes(ex)?;
    let dichotomy = green_minimal_with(
        ex,
        op,
        probes.x0,
        probes.y0,
        probes.x1,
        k_max,
        thresholds.dichotomy,
    )?;
    let symmetric = op.symmetric_at(&samples);
    let null_trace = if symmetric {
        Some(null_sequence(ex, op, probes.window, k_max)?)
    } else {
        None
    };
    let (verdict, green_value, hardy) = match dichotomy.verdict {
        Dichotomy::GreenLimit => {
            let consistent = null_trace
                .as_ref()
                .map_or(true, |t| t.final_minimum() >= thresholds.null_subcritical_min);
            if consistent {
                let hardy = subcritical_hardy(&dichotomy, &probes)?;
                let g = dichotomy.g_values.last().unwrap().1;
                (Verdict::Subcritical, Some(g), Some(hardy))
            } else {
                (Verdict::Undecided, None, None)
            }
        }
        Dichotomy::GroundState => {
            let consistent = null_trace
                .as_ref()
                .map_or(true, |t| t.final_minimum() < thresholds.null_critical_max);
            if consistent {
                (Verdict::Critical, None, None)
            } else {
                (Verdict::Undecided, None, None)
            }
        }
        Dichotomy::Undecided => (Verdict::Undecided, None, None),
    };
    Ok(ClassificationResult {
        verdict,
        lambda0_estimate: lambda_trace.richardson,
        lambda_trace,
        supercritical_witness: None,
        dichotomy: Some(dichotomy),
        green_value,
        hardy,
        null_trace,
        thresholds,
    })
}

/// Hardy weight for the subcritical branch, built from the normalized Green
/// profile and an independently solved positive supersolution.
fn subcritical_hardy(trace: &DichotomyTrace, probes: &Probes) -> Result<HardyWeight> {
    let system = &trace.final_system;
    let u = &trace.final_field;
    let x1 = probes.x1;
    let r = 0.5 * x1.dist(&probes.x0);
    let load = assemble_load(system, |p| if p.dist(&x1) <= r { 1.0 } else { 0.0 });
    let lu = ProfileLu::factor(&system.stiffness, 1e-13)?;
    let v = FEFunction { coeffs: lu.solve(&load) };
    hardy_weight(u, &v, system)
}

/// Ground state plus the source-independence cross-check: two delta sources
/// at different vertices must give profiles agreeing within 2 percent on
/// the probe window.
#[derive(Debug)]
pub struct GroundState {
    pub trace: DichotomyTrace,
    /// Max relative disagreement between the two source profiles.
    pub source_agreement: f64,
}

pub fn ground_state(
    ex: &ExhaustionSpec,
    op: &OperatorSpec,
    k_max: u32,
) -> Result<GroundState> {
    let probes = auto_probes(ex)?;
    let trace = green_minimal_with(
        ex,
        op,
        probes.x0,
        probes.y0,
        probes.x1,
        k_max,
        DichotomyThresholds::default(),
    )?;
    if trace.verdict != Dichotomy::GroundState {
        return Err(Error::Misuse(format!(
            "ground state requested but the dichotomy verdict is {:?}",
            trace.verdict
        )));
    }
    // Second source: delta at the y0 vertex instead of x0.
    let alt = green_minimal_with(
        ex,
        op,
        probes.y0,
        probes.x0,
        probes.x1,
        k_max,
        DichotomyThresholds::default(),
    )?;
    let mut agreement = 0.0f64;
    for (a, b) in trace
        .profiles
        .last()
        .unwrap()
        .1
        .iter()
        .zip(&alt.profiles.last().unwrap().1)
    {
        agreement = agreement.max((a - b).abs() / b.abs().max(1e-300));
    }
    if agreement > 0.02 {
        return Err(Error::Consistency {
            level: k_max as usize,
            detail: format!(
                "ground-state profiles from two sources disagree by {agreement:.3}"
            ),
        });
    }
    Ok(GroundState { trace, source_agreement: agreement })
}

/// Nonnegativity verdicts of `P - lambda V` over a grid of shifts. The
/// nonnegative set must be contiguous in lambda (the shift family has a
/// closed interval of nonnegativity).
pub fn lambda_interval_scan(
    ex: &ExhaustionSpec,
    op: &OperatorSpec,
    v: &ScalarField,
    lambdas: &[f64],
    k_max: u32,
) -> Result<Vec<(f64, bool)>> {
    let mut grid: Vec<f64> = lambdas.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut verdicts = Vec::new();
    for &lambda in &grid {
        let mut spec = op.clone();
        spec.weight = v.clone();
        spec.shift = lambda;
        let trace = lambda0_exhaustion(ex, &spec, k_max)?;
        verdicts.push((lambda, trace.min_value() >= -1e-8));
    }
    let first = verdicts.iter().position(|e| e.1);
    let last = verdicts.iter().rposition(|e| e.1);
    if let (Some(a), Some(b)) = (first, last) {
        if verdicts[a..=b].iter().any(|e| !e.1) {
            return Err(Error::Consistency {
                level: 0,
                detail: "nonnegativity verdicts are not contiguous in lambda".into(),
            });
        }
    }
    Ok(verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryMarker, DomainSpec, Growth, MeshRule, Shape, WindowRule};
    use crate::operator::{constant_scalar, constant_vector, CoefficientSet, RobinData};

    fn half_line(h: f64) -> ExhaustionSpec {
        let base = DomainSpec::new(
            Shape::Interval { a: 0.0, b: f64::INFINITY },
            BoundaryMarker::None,
        )
        .unwrap();
        ExhaustionSpec::new(
            base,
            WindowRule::Interval {
                left: Growth::Fixed(0.0),
                right: Growth::Geometric { scale: 1.0, ratio: 2.0 },
            },
            MeshRule::FixedH(h),
        )
    }

    fn bounded_zero_pi() -> ExhaustionSpec {
        let base = DomainSpec::new(
            Shape::Interval { a: 0.0, b: std::f64::consts::PI },
            BoundaryMarker::None,
        )
        .unwrap();
        ExhaustionSpec::new(
            base,
            WindowRule::Interval {
                left: Growth::Fixed(-1.0),
                right: Growth::Fixed(4.0),
            },
            MeshRule::FixedH(std::f64::consts::PI / 200.0),
        )
    }

    #[test]
    fn null_sequence_requires_symmetry() {
        let spec = OperatorSpec::new(
            CoefficientSet::laplacian(1).with_div_drift(constant_vector([1.0, 0.0])),
            RobinData::homogeneous(),
        );
        let err = null_sequence(&half_line(0.25), &spec, ProbeWindow::interval(1.0, 2.0), 3)
            .unwrap_err();
        assert!(matches!(err, Error::SymmetryRequired(_)));
    }

    #[test]
    fn null_sequence_rejects_empty_window() {
        let err = null_sequence(
            &half_line(0.25),
            &OperatorSpec::laplace(1),
            ProbeWindow::interval(95.0, 96.0),
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Misuse(_)));
    }

    #[test]
    fn null_sequence_rejects_indefinite_operator() {
        let spec = OperatorSpec::laplace(1).shifted(2.0);
        let err = null_sequence(
            &bounded_zero_pi(),
            &spec,
            ProbeWindow::interval(1.0, 2.0),
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonpositiveOperator { .. }));
    }

    #[test]
    fn hardy_weight_recovers_quarter_inverse_square() {
        let ex = half_line(0.01);
        let mesh = make_exhaustion(&ex, 4).unwrap(); // (0, 16)
        let system = assemble(&mesh, &OperatorSpec::laplace(1)).unwrap();
        let ones = FEFunction::ones(system.n_free());
        let linear = system.interpolate(|p| p.x);
        let w = hardy_weight(&ones, &linear, &system).unwrap();
        for x in [1.0f64, 2.0, 4.0] {
            let v = system.mesh.nearest_vertex(Point::on_axis(x));
            let expect = 0.25 / (x * x);
            assert!(
                (w.vertex_values[v] - expect).abs() < 0.01,
                "W({x}) = {} vs {expect}",
                w.vertex_values[v]
            );
        }
        assert!(w.recheck_lambda_c >= -1e-6);
    }

    #[test]
    fn hardy_weight_rejects_parallel_pair() {
        let ex = half_line(0.05);
        let mesh = make_exhaustion(&ex, 2).unwrap();
        let system = assemble(&mesh, &OperatorSpec::laplace(1)).unwrap();
        let u = FEFunction::ones(system.n_free());
        let err = hardy_weight(&u, &u.clone(), &system).unwrap_err();
        assert!(matches!(err, Error::DegeneratePair { .. }));
    }

    #[test]
    fn scan_on_bounded_interval_matches_lambda0() {
        // lambda_0 = 1 on (0, pi) with Dirichlet ends
        let ex = bounded_zero_pi();
        let verdicts = lambda_interval_scan(
            &ex,
            &OperatorSpec::laplace(1),
            &constant_scalar(1.0),
            &[-1.0, 0.0, 0.5, 1.0, 1.5],
            2,
        )
        .unwrap();
        let expected = [true, true, true, true, false];
        for ((lambda, ok), want) in verdicts.iter().zip(expected) {
            assert_eq!(*ok, want, "lambda = {lambda}");
        }
    }

    #[test]
    fn scan_negative_weight_flips_direction() {
        let ex = bounded_zero_pi();
        let verdicts = lambda_interval_scan(
            &ex,
            &OperatorSpec::laplace(1),
            &constant_scalar(-1.0),
            &[-10.0, 0.0, 10.0],
            2,
        )
        .unwrap();
        assert_eq!(
            verdicts.iter().map(|e| e.1).collect::<Vec<_>>(),
            vec![false, true, true]
        );
    }

    #[test]
    fn empty_scan_is_empty() {
        let ex = bounded_zero_pi();
        let verdicts = lambda_interval_scan(
            &ex,
            &OperatorSpec::laplace(1),
            &constant_scalar(1.0),
            &[],
            2,
        )
        .unwrap();
        assert!(verdicts.is_empty());
    }

    #[test]
    fn ground_state_refuses_subcritical_case() {
        // fast windows make the half-line case land green-limit quickly
        let base = DomainSpec::new(
            Shape::Interval { a: 0.0, b: f64::INFINITY },
            BoundaryMarker::None,
        )
        .unwrap();
        let ex = ExhaustionSpec::new(
            base,
            WindowRule::Interval {
                left: Growth::Fixed(0.0),
                right: Growth::Geometric { scale: 1.0, ratio: 4.0 },
            },
            MeshRule::FixedH(0.25),
        );
        let err = ground_state(&ex, &OperatorSpec::laplace(1), 8).unwrap_err();
        assert!(matches!(err, Error::Misuse(_)));
    }

    #[test]
    fn classify_requires_unit_weight() {
        let mut op = OperatorSpec::laplace(1);
        op.weight = constant_scalar(2.0);
        let err = classify(&half_line(0.25), &op, 3).unwrap_err();
        assert!(matches!(err, Error::Misuse(_)));
    }
}
