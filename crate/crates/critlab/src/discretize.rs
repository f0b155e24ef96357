//! P1 finite-element assembly of the weak bilinear form, including the
//! Robin surface term, with Dirichlet (and Cut) degrees of freedom
//! eliminated.
//!
//! Quadrature is fixed so results are reproducible bit for bit on a given
//! mesh: one-point barycenter quadrature for the diffusion and drift terms
//! (exact P1 gradients), two-point Gauss in 1D and the vertex rule
//! (weights 1/3) in 2D for the potential and mass terms, and facet-midpoint
//! evaluation of `gamma/beta` times the exact P1 facet mass matrix for the
//! Robin term.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryTag, MeshedDomain, Point};
use crate::operator::{OperatorSpec, ScalarField};
use crate::pencil;
use crate::sparse::{CsrMatrix, ProfileLu, Triplets};

/// Bijection between free-node indices and mesh vertex indices.
#[derive(Clone, Debug)]
pub struct FreeMap {
    pub free_to_vertex: Vec<usize>,
    pub vertex_to_free: Vec<Option<usize>>,
}

impl FreeMap {
    fn from_mesh(mesh: &MeshedDomain, extra: Option<&dyn Fn(Point) -> bool>) -> Self {
        let constrained = mesh.constrained_vertices();
        let mut free_to_vertex = Vec::new();
        let mut vertex_to_free = vec![None; mesh.vertices.len()];
        for v in 0..mesh.vertices.len() {
            let pinned = extra.map_or(false, |f| f(mesh.vertices[v]));
            if !constrained[v] && !pinned {
                vertex_to_free[v] = Some(free_to_vertex.len());
                free_to_vertex.push(v);
            }
        }
        FreeMap { free_to_vertex, vertex_to_free }
    }

    pub fn n_free(&self) -> usize {
        self.free_to_vertex.len()
    }
}

/// Nodal coefficient vector on the free nodes; constrained nodes are
/// implicitly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FEFunction {
    pub coeffs: Vec<f64>,
}

impl FEFunction {
    pub fn zeros(n: usize) -> Self {
        FEFunction { coeffs: vec![0.0; n] }
    }

    pub fn ones(n: usize) -> Self {
        FEFunction { coeffs: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Assembled discrete operator on the free nodes.
#[derive(Clone)]
pub struct AssembledSystem {
    /// Discrete bilinear form (stiffness), Robin term folded in.
    pub stiffness: CsrMatrix,
    /// Mass matrix.
    pub mass: CsrMatrix,
    /// Robin boundary mass, also stored separately.
    pub robin_mass: CsrMatrix,
    pub free_map: FreeMap,
    pub mesh: Arc<MeshedDomain>,
    pub spec: OperatorSpec,
}

impl std::fmt::Debug for AssembledSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AssembledSystem")
            .field("n_free", &self.n_free())
            .field("nnz", &self.stiffness.nnz())
            .field("dim", &self.mesh.dim)
            .finish()
    }
}

impl AssembledSystem {
    pub fn n_free(&self) -> usize {
        self.free_map.n_free()
    }

    /// Nodal value at a mesh vertex (zero on constrained vertices).
    pub fn vertex_value(&self, f: &FEFunction, vertex: usize) -> f64 {
        match self.free_map.vertex_to_free[vertex] {
            Some(i) => f.coeffs[i],
            None => 0.0,
        }
    }

    /// P1 interpolation at an arbitrary point of the meshed domain.
    pub fn eval(&self, f: &FEFunction, p: Point) -> Result<f64> {
        if f.len() != self.n_free() {
            return Err(Error::SizeMismatch { expected: self.n_free(), got: f.len() });
        }
        let mesh = &self.mesh;
        let tol = 1e-10 * (1.0 + mesh.h);
        for e in &mesh.elements {
            let n = e.nodes();
            if mesh.dim == 1 {
                let (x0, x1) = (mesh.vertices[n[0]].x, mesh.vertices[n[1]].x);
                if p.x >= x0 - tol && p.x <= x1 + tol {
                    let t = ((p.x - x0) / (x1 - x0)).clamp(0.0, 1.0);
                    return Ok((1.0 - t) * self.vertex_value(f, n[0])
                        + t * self.vertex_value(f, n[1]));
                }
            } else {
                let (a, b, c) = (mesh.vertices[n[0]], mesh.vertices[n[1]], mesh.vertices[n[2]]);
                let area2 = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
                let l0 = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) / area2;
                let l1 = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) / area2;
                let l2 = 1.0 - l0 - l1;
                let eps = tol / (1.0 + area2.abs().sqrt());
                if l0 >= -eps && l1 >= -eps && l2 >= -eps {
                    return Ok(l0 * self.vertex_value(f, n[0])
                        + l1 * self.vertex_value(f, n[1])
                        + l2 * self.vertex_value(f, n[2]));
                }
            }
        }
        Err(Error::Misuse(format!(
            "point ({}, {}) lies outside the mesh",
            p.x, p.y
        )))
    }

    /// Nodal interpolant restricted to free nodes.
    pub fn interpolate(&self, g: impl Fn(Point) -> f64) -> FEFunction {
        let coeffs = self
            .free_map
            .free_to_vertex
            .iter()
            .map(|&v| g(self.mesh.vertices[v]))
            .collect();
        FEFunction { coeffs }
    }

    /// Positions of the free nodes.
    pub fn free_points(&self) -> Vec<Point> {
        self.free_map
            .free_to_vertex
            .iter()
            .map(|&v| self.mesh.vertices[v])
            .collect()
    }
}

const GAUSS2_OFFSET: f64 = 0.288_675_134_594_812_88; // 1/(2*sqrt(3))

/// Assembles stiffness, mass and Robin boundary mass for `spec` on a tagged
/// mesh. The assembled operator is `P - shift * V`.
pub fn assemble(mesh: &MeshedDomain, spec: &OperatorSpec) -> Result<AssembledSystem> {
    assemble_constrained(mesh, spec, None)
}

/// Like [`assemble`], with additional vertices pinned to zero (used for
/// zero-trace conditions on interior sets such as shrinking balls).
pub fn assemble_constrained(
    mesh: &MeshedDomain,
    spec: &OperatorSpec,
    extra_constraint: Option<&dyn Fn(Point) -> bool>,
) -> Result<AssembledSystem> {
    for (i, f) in mesh.boundary_facets.iter().enumerate() {
        if f.tag == BoundaryTag::Untagged {
            return Err(Error::UntaggedFacet { facet: i });
        }
    }
    let free_map = FreeMap::from_mesh(mesh, extra_constraint);
    let n = free_map.n_free();
    let mut k = Triplets::new(n, n);
    let mut m = Triplets::new(n, n);
    let mut r = Triplets::new(n, n);

    let coeffs = &spec.coefficients;
    let shift = spec.shift;
    let weight = &spec.weight;
    // effective potential of the assembled operator
    let c_eff = |p: Point| (coeffs.potential)(p) - shift * (weight)(p);

    for elem in &mesh.elements {
        let nodes = elem.nodes();
        if mesh.dim == 1 {
            let (x0, x1) = (mesh.vertices[nodes[0]].x, mesh.vertices[nodes[1]].x);
            let h = x1 - x0;
            let grad = [-1.0 / h, 1.0 / h];
            let center = Point::on_axis(0.5 * (x0 + x1));
            let a = (coeffs.diffusion)(center)[0][0];
            let bt = (coeffs.div_drift)(center)[0];
            let bb = (coeffs.grad_drift)(center)[0];
            let mut k_loc = [[0.0f64; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    // diffusion + divergence-slot drift + gradient-slot drift
                    k_loc[i][j] += h * a * grad[i] * grad[j];
                    k_loc[i][j] += h * bt * grad[i] * 0.5;
                    k_loc[i][j] += h * bb * grad[j] * 0.5;
                }
            }
            // potential and mass: 2-point Gauss
            let mut m_loc = [[0.0f64; 2]; 2];
            for sign in [-1.0, 1.0] {
                let xg = 0.5 * (x0 + x1) + sign * GAUSS2_OFFSET * h;
                let pg = Point::on_axis(xg);
                let t = (xg - x0) / h;
                let phi = [1.0 - t, t];
                let w = 0.5 * h;
                let c = c_eff(pg);
                for i in 0..2 {
                    for j in 0..2 {
                        k_loc[i][j] += w * c * phi[i] * phi[j];
                        m_loc[i][j] += w * phi[i] * phi[j];
                    }
                }
            }
            scatter(&free_map, nodes, &k_loc, &mut k);
            scatter(&free_map, nodes, &m_loc, &mut m);
        } else {
            let pts = [
                mesh.vertices[nodes[0]],
                mesh.vertices[nodes[1]],
                mesh.vertices[nodes[2]],
            ];
            let area2 = (pts[1].x - pts[0].x) * (pts[2].y - pts[0].y)
                - (pts[2].x - pts[0].x) * (pts[1].y - pts[0].y);
            let area = 0.5 * area2;
            if area <= 0.0 {
                return Err(Error::InvalidGeometry(
                    "element with nonpositive area reached assembly".into(),
                ));
            }
            let grads: Vec<[f64; 2]> = (0..3)
                .map(|i| {
                    let pj = pts[(i + 1) % 3];
                    let pk = pts[(i + 2) % 3];
                    [(pj.y - pk.y) / area2, (pk.x - pj.x) / area2]
                })
                .collect();
            let center = Point::new(
                (pts[0].x + pts[1].x + pts[2].x) / 3.0,
                (pts[0].y + pts[1].y + pts[2].y) / 3.0,
            );
            let a = (coeffs.diffusion)(center);
            let bt = (coeffs.div_drift)(center);
            let bb = (coeffs.grad_drift)(center);
            let mut k_loc = [[0.0f64; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    let agj = [
                        a[0][0] * grads[j][0] + a[0][1] * grads[j][1],
                        a[1][0] * grads[j][0] + a[1][1] * grads[j][1],
                    ];
                    k_loc[i][j] += area * (grads[i][0] * agj[0] + grads[i][1] * agj[1]);
                    k_loc[i][j] +=
                        area * (bt[0] * grads[i][0] + bt[1] * grads[i][1]) / 3.0;
                    k_loc[i][j] +=
                        area * (bb[0] * grads[j][0] + bb[1] * grads[j][1]) / 3.0;
                }
            }
            // potential and mass: vertex rule, diagonal contributions
            let mut m_loc = [[0.0f64; 3]; 3];
            for i in 0..3 {
                let w = area / 3.0;
                k_loc[i][i] += w * c_eff(pts[i]);
                m_loc[i][i] += w;
            }
            scatter(&free_map, nodes, &k_loc, &mut k);
            scatter(&free_map, nodes, &m_loc, &mut m);
        }
    }

    for facet in &mesh.boundary_facets {
        if facet.tag != BoundaryTag::Robin {
            continue;
        }
        let mid = mesh.facet_midpoint(facet);
        let beta = (spec.robin.beta)(mid);
        if beta <= 0.0 {
            return Err(Error::RobinData { point: [mid.x, mid.y] });
        }
        let ratio = (spec.robin.gamma)(mid) / beta;
        let nodes = facet.nodes();
        if nodes.len() == 1 {
            let loc = [[ratio]];
            scatter(&free_map, nodes, &loc, &mut k);
            let loc_r = [[ratio]];
            scatter(&free_map, nodes, &loc_r, &mut r);
        } else {
            let len = mesh.facet_measure(facet);
            let base = len / 6.0;
            let loc = [
                [2.0 * base * ratio, base * ratio],
                [base * ratio, 2.0 * base * ratio],
            ];
            scatter(&free_map, nodes, &loc, &mut k);
            scatter(&free_map, nodes, &loc, &mut r);
        }
    }

    Ok(AssembledSystem {
        stiffness: k.build(),
        mass: m.build(),
        robin_mass: r.build(),
        free_map,
        mesh: Arc::new(mesh.clone()),
        spec: spec.clone(),
    })
}

fn scatter<const N: usize>(
    free_map: &FreeMap,
    nodes: &[usize],
    local: &[[f64; N]],
    out: &mut Triplets,
) {
    for (i, &vi) in nodes.iter().enumerate() {
        let Some(fi) = free_map.vertex_to_free[vi] else { continue };
        for (j, &vj) in nodes.iter().enumerate() {
            let Some(fj) = free_map.vertex_to_free[vj] else { continue };
            out.push(fi, fj, local[i][j]);
        }
    }
}

/// Mass matrix weighted by a scalar field, using the same quadrature as the
/// potential term. By assembly linearity, `K(P + c') = K(P) + weighted_mass(c')`.
pub fn weighted_mass(system: &AssembledSystem, w: &ScalarField) -> CsrMatrix {
    mass_like(system, |p| w(p))
}

/// Mass matrix weighted by the P1 interpolant of vertex values `w_vertex`.
pub fn mass_with_nodal_weight(system: &AssembledSystem, w_vertex: &[f64]) -> CsrMatrix {
    assert_eq!(w_vertex.len(), system.mesh.vertices.len());
    let mesh = system.mesh.clone();
    let interp = move |p: Point, nodes: &[usize], phis: &[f64]| -> f64 {
        nodes
            .iter()
            .zip(phis)
            .map(|(&v, phi)| w_vertex[v] * phi)
            .sum::<f64>()
            + 0.0 * (p.x + mesh.h)
    };
    mass_like_nodal(system, interp)
}

fn mass_like(system: &AssembledSystem, w: impl Fn(Point) -> f64) -> CsrMatrix {
    mass_like_nodal(system, |p, _, _| w(p))
}

fn mass_like_nodal(
    system: &AssembledSystem,
    w: impl Fn(Point, &[usize], &[f64]) -> f64,
) -> CsrMatrix {
    let mesh = &system.mesh;
    let free_map = &system.free_map;
    let n = free_map.n_free();
    let mut m = Triplets::new(n, n);
    for elem in &mesh.elements {
        let nodes = elem.nodes();
        if mesh.dim == 1 {
            let (x0, x1) = (mesh.vertices[nodes[0]].x, mesh.vertices[nodes[1]].x);
            let h = x1 - x0;
            let mut loc = [[0.0f64; 2]; 2];
            for sign in [-1.0, 1.0] {
                let xg = 0.5 * (x0 + x1) + sign * GAUSS2_OFFSET * h;
                let t = (xg - x0) / h;
                let phi = [1.0 - t, t];
                let wq = 0.5 * h * w(Point::on_axis(xg), nodes, &phi);
                for i in 0..2 {
                    for j in 0..2 {
                        loc[i][j] += wq * phi[i] * phi[j];
                    }
                }
            }
            scatter(free_map, nodes, &loc, &mut m);
        } else {
            let pts = [
                mesh.vertices[nodes[0]],
                mesh.vertices[nodes[1]],
                mesh.vertices[nodes[2]],
            ];
            let area = 0.5
                * ((pts[1].x - pts[0].x) * (pts[2].y - pts[0].y)
                    - (pts[2].x - pts[0].x) * (pts[1].y - pts[0].y));
            let mut loc = [[0.0f64; 3]; 3];
            for i in 0..3 {
                let mut phi = [0.0; 3];
                phi[i] = 1.0;
                loc[i][i] += area / 3.0 * w(pts[i], nodes, &phi);
            }
            scatter(free_map, nodes, &loc, &mut m);
        }
    }
    m.build()
}

/// L2 mass over the whole mesh boundary (all tags), restricted to free
/// nodes; the discrete left-hand side of the trace inequality.
pub fn boundary_mass(system: &AssembledSystem) -> CsrMatrix {
    let mesh = &system.mesh;
    let free_map = &system.free_map;
    let n = free_map.n_free();
    let mut b = Triplets::new(n, n);
    for facet in &mesh.boundary_facets {
        let nodes = facet.nodes();
        if nodes.len() == 1 {
            let loc = [[1.0]];
            scatter(free_map, nodes, &loc, &mut b);
        } else {
            let len = mesh.facet_measure(facet);
            let base = len / 6.0;
            let loc = [[2.0 * base, base], [base, 2.0 * base]];
            scatter(free_map, nodes, &loc, &mut b);
        }
    }
    b.build()
}

/// Load vector `(f, phi_i)` over the free nodes, with the same quadrature
/// as the mass terms.
pub fn assemble_load(system: &AssembledSystem, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let mesh = &system.mesh;
    let free_map = &system.free_map;
    let mut load = vec![0.0; free_map.n_free()];
    for elem in &mesh.elements {
        let nodes = elem.nodes();
        if mesh.dim == 1 {
            let (x0, x1) = (mesh.vertices[nodes[0]].x, mesh.vertices[nodes[1]].x);
            let h = x1 - x0;
            for sign in [-1.0, 1.0] {
                let xg = 0.5 * (x0 + x1) + sign * GAUSS2_OFFSET * h;
                let t = (xg - x0) / h;
                let phi = [1.0 - t, t];
                let wq = 0.5 * h * f(Point::on_axis(xg));
                for (i, &v) in nodes.iter().enumerate() {
                    if let Some(fi) = free_map.vertex_to_free[v] {
                        load[fi] += wq * phi[i];
                    }
                }
            }
        } else {
            let pts = [
                mesh.vertices[nodes[0]],
                mesh.vertices[nodes[1]],
                mesh.vertices[nodes[2]],
            ];
            let area = 0.5
                * ((pts[1].x - pts[0].x) * (pts[2].y - pts[0].y)
                    - (pts[2].x - pts[0].x) * (pts[1].y - pts[0].y));
            for (i, &v) in nodes.iter().enumerate() {
                if let Some(fi) = free_map.vertex_to_free[v] {
                    load[fi] += area / 3.0 * f(pts[i]);
                }
            }
        }
    }
    load
}

/// `phi^T K phi`.
pub fn quadratic_form(system: &AssembledSystem, phi: &FEFunction) -> Result<f64> {
    if phi.len() != system.n_free() {
        return Err(Error::SizeMismatch { expected: system.n_free(), got: phi.len() });
    }
    Ok(system.stiffness.bilinear(&phi.coeffs, &phi.coeffs))
}

/// Smallest shift `gamma_m` with `phi^T (K + gamma_m M) phi >= phi^T M phi`:
/// computed as `max(0, -lambda_min(sym(K), M)) + 1` and then verified by a
/// factorization, inflating slightly if the eigensolve left it short.
pub fn estimate_coercive_shift(system: &AssembledSystem) -> Result<f64> {
    let sym = system.stiffness.symmetric_part();
    let sol = pencil::smallest_sym_pencil(&sym, &system.mass, 1e-10, 10_000)?;
    let mut gamma = (-sol.lambda).max(0.0) + 1.0;
    for _ in 0..64 {
        let shifted = sym.add_scaled(&system.mass, gamma - 1.0);
        match ProfileLu::factor(&shifted, 1e-14) {
            Ok(lu) if lu.negative_pivots() == 0 => return Ok(gamma),
            _ => gamma = gamma * 1.0001 + 1e-12,
        }
    }
    Err(Error::Numerical("coercive shift verification failed".into()))
}

/// Worst ratio of boundary L2 mass to `eps * |u|_1^2 + (1/eps) * |u|_0^2`
/// over random free-node vectors; a finite value certifies the discrete
/// trace inequality with that constant.
pub fn trace_inequality_probe(
    system: &AssembledSystem,
    trials: usize,
    eps: f64,
) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    if !(eps > 0.0) {
        return Err(Error::Misuse("eps must be positive".into()));
    }
    let n = system.n_free();
    let boundary = boundary_mass(system);
    let grad = assemble(&system.mesh, &OperatorSpec::laplace(system.mesh.dim))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7ace_11e9);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l2 = system.mass.bilinear(&u, &u);
        if l2 <= 0.0 {
            continue; // zero draws are excluded by convention
        }
        let num = boundary.bilinear(&u, &u);
        let den = eps * grad.stiffness.bilinear(&u, &u) + l2 / eps;
        worst = worst.max(num / den);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_interval_mesh, tag_boundary, BoundaryMarker, DomainSpec, Shape};
    use crate::operator::{constant_scalar, RobinData};

    pub(crate) fn interval_system(
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
    fn hand_assembled_dirichlet_laplacian_n2() {
        let sys = interval_system(0.0, 1.0, 2, BoundaryMarker::None, &OperatorSpec::laplace(1));
        assert_eq!(sys.n_free(), 1);
        assert!((sys.stiffness.get(0, 0) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn hand_assembled_robin_case_n2() {
        // Robin at 0 with gamma/beta = 1: free nodes {0, 0.5},
        // K = [[2+1, -2], [-2, 4]].
        let spec = OperatorSpec::laplace(1).with_robin(RobinData::with_ratio(1.0));
        let sys = interval_system(0.0, 1.0, 2, BoundaryMarker::Left, &spec);
        assert_eq!(sys.n_free(), 2);
        assert!((sys.stiffness.get(0, 0) - 3.0).abs() < 1e-14);
        assert!((sys.stiffness.get(0, 1) + 2.0).abs() < 1e-14);
        assert!((sys.stiffness.get(1, 0) + 2.0).abs() < 1e-14);
        assert!((sys.stiffness.get(1, 1) - 4.0).abs() < 1e-14);
        // Robin mass carries exactly the boundary contribution.
        assert!((sys.robin_mass.get(0, 0) - 1.0).abs() < 1e-14);
        assert_eq!(sys.robin_mass.get(1, 1), 0.0);
    }

    #[test]
    fn constant_potential_adds_mass() {
        let base = OperatorSpec::laplace(1);
        let with_c = OperatorSpec::new(
            crate::operator::CoefficientSet::laplacian(1).with_potential(constant_scalar(1.0)),
            RobinData::homogeneous(),
        );
        let s0 = interval_system(0.0, 1.0, 8, BoundaryMarker::None, &base);
        let s1 = interval_system(0.0, 1.0, 8, BoundaryMarker::None, &with_c);
        let expect = s0.stiffness.add_scaled(&s0.mass, 1.0);
        let diff = s1.stiffness.add_scaled(&expect, -1.0);
        assert!(diff.max_abs() < 1e-14);
    }

    #[test]
    fn shift_moves_mass_exactly() {
        let base = OperatorSpec::laplace(1);
        let shifted = OperatorSpec::laplace(1).shifted(2.5);
        let s0 = interval_system(0.0, 1.0, 8, BoundaryMarker::None, &base);
        let s1 = interval_system(0.0, 1.0, 8, BoundaryMarker::None, &shifted);
        let expect = s0.stiffness.add_scaled(&s0.mass, -2.5);
        let diff = s1.stiffness.add_scaled(&expect, -1.0);
        assert!(diff.max_abs() < 1e-14);
    }

    #[test]
    fn quadratic_form_of_hat_is_four() {
        let sys = interval_system(0.0, 1.0, 2, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let phi = FEFunction::ones(1);
        assert!((quadratic_form(&sys, &phi).unwrap() - 4.0).abs() < 1e-14);
        let zero = FEFunction::zeros(1);
        assert_eq!(quadratic_form(&sys, &zero).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_form_rejects_size_mismatch() {
        let sys = interval_system(0.0, 1.0, 2, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let phi = FEFunction::ones(3);
        assert!(matches!(
            quadratic_form(&sys, &phi),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn coercive_shift_for_positive_form_is_one() {
        let pi = std::f64::consts::PI;
        let sys = interval_system(0.0, pi, 200, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let gamma = estimate_coercive_shift(&sys).unwrap();
        assert_eq!(gamma, 1.0);
    }

    #[test]
    fn coercive_shift_tracks_negative_spectrum() {
        let pi = std::f64::consts::PI;
        let spec = OperatorSpec::laplace(1).shifted(5.0);
        let sys = interval_system(0.0, pi, 400, BoundaryMarker::None, &spec);
        let gamma = estimate_coercive_shift(&sys).unwrap();
        assert!((gamma - 5.0).abs() < 1e-3, "gamma = {gamma}");
    }

    #[test]
    fn coercive_shift_makes_form_positive() {
        use rand::{Rng, SeedableRng};
        let spec = OperatorSpec::laplace(1).shifted(7.3);
        let sys = interval_system(0.0, 2.0, 40, BoundaryMarker::None, &spec);
        let gamma = estimate_coercive_shift(&sys).unwrap();
        let shifted = sys.stiffness.add_scaled(&sys.mass, gamma);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let v: Vec<f64> = (0..sys.n_free()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let quad = shifted.bilinear(&v, &v);
            let mass = sys.mass.bilinear(&v, &v);
            assert!(quad >= mass - 1e-10 * mass.abs());
        }
    }

    #[test]
    fn untagged_facet_rejected() {
        let mesh = build_interval_mesh(0.0, 1.0, 4).unwrap();
        assert!(matches!(
            assemble(&mesh, &OperatorSpec::laplace(1)),
            Err(Error::UntaggedFacet { .. })
        ));
    }

    #[test]
    fn nonpositive_beta_rejected() {
        let spec = OperatorSpec::laplace(1).with_robin(RobinData {
            beta: constant_scalar(0.0),
            gamma: constant_scalar(1.0),
        });
        let domain = DomainSpec::new(
            Shape::Interval { a: 0.0, b: 1.0 },
            BoundaryMarker::Left,
        )
        .unwrap();
        let mesh = tag_boundary(&build_interval_mesh(0.0, 1.0, 4).unwrap(), &domain).unwrap();
        assert!(matches!(
            assemble(&mesh, &spec),
            Err(Error::RobinData { .. })
        ));
    }

    #[test]
    fn trace_probe_hat_at_robin_end() {
        // Single hat at the Robin end of (0,1), n = 10: boundary mass = 1,
        // grad energy = 1/h, L2 mass = h/3 (consistent P1).
        let spec = OperatorSpec::laplace(1);
        let sys = interval_system(0.0, 1.0, 10, BoundaryMarker::Left, &spec);
        let mut u = FEFunction::zeros(sys.n_free());
        u.coeffs[0] = 1.0; // vertex 0 is free (Robin)
        let h = 0.1;
        let boundary = boundary_mass(&sys);
        let num = boundary.bilinear(&u.coeffs, &u.coeffs);
        assert!((num - 1.0).abs() < 1e-14);
        let den = sys.stiffness.bilinear(&u.coeffs, &u.coeffs) + sys.mass.bilinear(&u.coeffs, &u.coeffs);
        let expected = 1.0 / h + h / 3.0;
        assert!((den - expected).abs() < 1e-13);
        let ratio = trace_inequality_probe(&sys, 50, 1.0).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
    }

    #[test]
    fn mass_is_positive_definite() {
        let sys = interval_system(0.0, 1.0, 16, BoundaryMarker::None, &OperatorSpec::laplace(1));
        let sol = pencil::smallest_sym_pencil(
            &sys.mass,
            &{
                let mut t = Triplets::new(sys.n_free(), sys.n_free());
                for i in 0..sys.n_free() {
                    t.push(i, i, 1.0);
                }
                t.build()
            },
            1e-10,
            10_000,
        )
        .unwrap();
        assert!(sol.lambda > 0.0);
    }
}
