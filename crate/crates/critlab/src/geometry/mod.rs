//! Meshes, boundary decomposition, and exhaustion sequences.
//!
//! Domains are 1D intervals or 2D polygonal regions whose boundary is split
//! into a Robin portion and a Dirichlet portion. Unbounded domains are
//! handled through exhaustion sequences: the domain is intersected with a
//! growing family of axis-aligned windows, and boundary created by the
//! truncation is tagged [`BoundaryTag::Cut`] (treated as Dirichlet
//! downstream).

mod interval;
mod polygon;
pub mod io;

pub use interval::build_interval_mesh;
pub use polygon::build_polygon_mesh;

use crate::error::{Error, Result};

/// Absolute tolerance for "point lies on the boundary" tests.
pub const ON_BOUNDARY_TOL: f64 = 1e-12;
/// Minimum angle (radians) between a Cut facet and a Robin facet sharing a
/// vertex.
pub const TRANSVERSALITY_TOL_RAD: f64 = 1e-6;

/// A point in the plane; 1D meshes use `y = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn on_axis(x: f64) -> Self {
        Point { x, y: 0.0 }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

/// Tag carried by each boundary facet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryTag {
    /// Not yet decided; rejected by assembly.
    Untagged,
    Robin,
    Dirichlet,
    /// Artificial truncation boundary; treated as Dirichlet downstream.
    Cut,
}

/// Mesh cell: a segment in 1D, a triangle in 2D.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Element {
    nodes: [usize; 3],
    len: u8,
}

impl Element {
    pub fn segment(i: usize, j: usize) -> Self {
        Element { nodes: [i, j, usize::MAX], len: 2 }
    }

    pub fn triangle(i: usize, j: usize, k: usize) -> Self {
        Element { nodes: [i, j, k], len: 3 }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.len as usize]
    }
}

/// Boundary facet: a vertex in 1D, an edge in 2D.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryFacet {
    nodes: [usize; 2],
    len: u8,
    pub tag: BoundaryTag,
}

impl BoundaryFacet {
    pub fn vertex(i: usize, tag: BoundaryTag) -> Self {
        BoundaryFacet { nodes: [i, usize::MAX], len: 1, tag }
    }

    pub fn edge(i: usize, j: usize, tag: BoundaryTag) -> Self {
        BoundaryFacet { nodes: [i, j], len: 2, tag }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.len as usize]
    }
}

/// Conforming simplicial mesh with tagged boundary.
#[derive(Clone, Debug)]
pub struct MeshedDomain {
    pub dim: usize,
    pub vertices: Vec<Point>,
    pub elements: Vec<Element>,
    pub boundary_facets: Vec<BoundaryFacet>,
    /// Maximum element diameter.
    pub h: f64,
}

impl MeshedDomain {
    pub fn facet_midpoint(&self, facet: &BoundaryFacet) -> Point {
        let nodes = facet.nodes();
        if nodes.len() == 1 {
            self.vertices[nodes[0]]
        } else {
            let a = self.vertices[nodes[0]];
            let b = self.vertices[nodes[1]];
            Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
        }
    }

    pub fn facet_measure(&self, facet: &BoundaryFacet) -> f64 {
        let nodes = facet.nodes();
        if nodes.len() == 1 {
            1.0
        } else {
            self.vertices[nodes[0]].dist(&self.vertices[nodes[1]])
        }
    }

    /// Length (1D) or signed area (2D, positive when counterclockwise).
    pub fn element_measure(&self, elem: &Element) -> f64 {
        let n = elem.nodes();
        match n.len() {
            2 => self.vertices[n[1]].x - self.vertices[n[0]].x,
            3 => {
                let a = self.vertices[n[0]];
                let b = self.vertices[n[1]];
                let c = self.vertices[n[2]];
                0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
            }
            _ => unreachable!(),
        }
    }

    pub fn element_diameter(&self, elem: &Element) -> f64 {
        let n = elem.nodes();
        let mut d: f64 = 0.0;
        for i in 0..n.len() {
            for j in (i + 1)..n.len() {
                d = d.max(self.vertices[n[i]].dist(&self.vertices[n[j]]));
            }
        }
        d
    }

    pub fn max_diameter(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| self.element_diameter(e))
            .fold(0.0, f64::max)
    }

    /// Robin boundary measure: total facet length in 2D, facet count in 1D.
    pub fn robin_measure(&self) -> f64 {
        self.boundary_facets
            .iter()
            .filter(|f| f.tag == BoundaryTag::Robin)
            .map(|f| self.facet_measure(f))
            .sum()
    }

    /// Vertices that lie on a Dirichlet or Cut facet (eliminated by assembly).
    pub fn constrained_vertices(&self) -> Vec<bool> {
        let mut constrained = vec![false; self.vertices.len()];
        for f in &self.boundary_facets {
            if matches!(f.tag, BoundaryTag::Dirichlet | BoundaryTag::Cut) {
                for &v in f.nodes() {
                    constrained[v] = true;
                }
            }
        }
        constrained
    }

    pub fn nearest_vertex(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = v.dist(&p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// All elements must form a single connected complex.
    pub fn is_connected(&self) -> bool {
        if self.elements.is_empty() {
            return false;
        }
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in &self.elements {
            let nodes = e.nodes();
            let r0 = find(&mut parent, nodes[0]);
            for &v in &nodes[1..] {
                let r = find(&mut parent, v);
                parent[r] = r0;
            }
        }
        let mut used = vec![false; n];
        for e in &self.elements {
            for &v in e.nodes() {
                used[v] = true;
            }
        }
        let mut root = None;
        for i in 0..n {
            if used[i] {
                let r = find(&mut parent, i);
                match root {
                    None => root = Some(r),
                    Some(r0) if r0 != r => return false,
                    _ => {}
                }
            }
        }
        true
    }

    /// Recomputes the boundary facets of the element complex (untagged).
    /// Used to check that `boundary_facets` lists each exactly once.
    pub fn derive_boundary_facets(&self) -> Vec<Vec<usize>> {
        use std::collections::HashMap;
        let mut count: HashMap<Vec<usize>, (Vec<usize>, usize)> = HashMap::new();
        for e in &self.elements {
            let n = e.nodes();
            let faces: Vec<Vec<usize>> = if n.len() == 2 {
                vec![vec![n[0]], vec![n[1]]]
            } else {
                vec![vec![n[0], n[1]], vec![n[1], n[2]], vec![n[2], n[0]]]
            };
            for f in faces {
                let mut key = f.clone();
                key.sort_unstable();
                let entry = count.entry(key).or_insert((f, 0));
                entry.1 += 1;
            }
        }
        let mut out: Vec<Vec<usize>> = count
            .into_iter()
            .filter(|(_, (_, c))| *c == 1)
            .map(|(_, (f, _))| f)
            .collect();
        out.sort();
        out
    }
}

/// Linear constraint `a*x + b*y <= c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfSpace {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfSpace {
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.a * p.x + self.b * p.y <= self.c + tol
    }

    pub fn active(&self, p: Point, tol: f64) -> bool {
        (self.a * p.x + self.b * p.y - self.c).abs() <= tol * (self.a.hypot(self.b))
    }
}

/// Domain geometry.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Open interval; ends may be infinite.
    Interval { a: f64, b: f64 },
    /// Simple polygon, counterclockwise vertex loop.
    Polygon(Vec<Point>),
    /// Intersection of half-planes (half-plane, strip, wedge, ...).
    HalfSpaces(Vec<HalfSpace>),
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Shape::Interval { a, b } => a.is_finite() && b.is_finite(),
            Shape::Polygon(_) => true,
            // Conservative: half-space lists are treated as unbounded.
            Shape::HalfSpaces(_) => false,
        }
    }

    pub fn on_boundary(&self, p: Point, tol: f64) -> bool {
        match self {
            Shape::Interval { a, b } => {
                (a.is_finite() && (p.x - a).abs() <= tol)
                    || (b.is_finite() && (p.x - b).abs() <= tol)
            }
            Shape::Polygon(verts) => {
                let n = verts.len();
                (0..n).any(|i| dist_point_segment(p, verts[i], verts[(i + 1) % n]) <= tol)
            }
            Shape::HalfSpaces(hs) => {
                hs.iter().all(|h| h.contains(p, tol)) && hs.iter().any(|h| h.active(p, tol))
            }
        }
    }

    /// Probe points used to validate the boundary decomposition.
    pub fn boundary_samples(&self) -> Vec<Point> {
        match self {
            Shape::Interval { a, b } => {
                let mut s = Vec::new();
                if a.is_finite() {
                    s.push(Point::on_axis(*a));
                }
                if b.is_finite() {
                    s.push(Point::on_axis(*b));
                }
                s
            }
            Shape::Polygon(verts) => {
                let n = verts.len();
                (0..n)
                    .map(|i| {
                        let q = verts[(i + 1) % n];
                        Point::new(0.5 * (verts[i].x + q.x), 0.5 * (verts[i].y + q.y))
                    })
                    .collect()
            }
            Shape::HalfSpaces(_) => Vec::new(),
        }
    }
}

fn dist_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(&a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(&Point::new(a.x + t * dx, a.y + t * dy))
}

/// Named boundary predicate. The vocabulary is deliberately small so that
/// batch configs stay declarative.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryMarker {
    All,
    None,
    /// Left endpoint of an interval (finite `a`).
    Left,
    /// Right endpoint of an interval (finite `b`).
    Right,
    /// Boundary points with `x = value`.
    EdgeX(f64),
    /// Boundary points with `y = value`.
    EdgeY(f64),
    /// Boundary points on the i-th half-space line of a `HalfSpaces` shape.
    FaceOf(usize),
    Not(Box<BoundaryMarker>),
    Any(Vec<BoundaryMarker>),
}

impl BoundaryMarker {
    pub fn complement(self) -> BoundaryMarker {
        BoundaryMarker::Not(Box::new(self))
    }

    pub fn holds(&self, shape: &Shape, p: Point) -> bool {
        let tol = ON_BOUNDARY_TOL;
        match self {
            BoundaryMarker::All => true,
            BoundaryMarker::None => false,
            BoundaryMarker::Left => match shape {
                Shape::Interval { a, .. } => a.is_finite() && (p.x - a).abs() <= tol,
                _ => false,
            },
            BoundaryMarker::Right => match shape {
                Shape::Interval { b, .. } => b.is_finite() && (p.x - b).abs() <= tol,
                _ => false,
            },
            BoundaryMarker::EdgeX(v) => (p.x - v).abs() <= tol,
            BoundaryMarker::EdgeY(v) => (p.y - v).abs() <= tol,
            BoundaryMarker::FaceOf(i) => match shape {
                Shape::HalfSpaces(hs) => hs.get(*i).map_or(false, |h| h.active(p, tol)),
                _ => false,
            },
            BoundaryMarker::Not(m) => !m.holds(shape, p),
            BoundaryMarker::Any(ms) => ms.iter().any(|m| m.holds(shape, p)),
        }
    }
}

/// Domain plus its Robin/Dirichlet boundary decomposition.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    pub shape: Shape,
    pub robin: BoundaryMarker,
    pub dirichlet: BoundaryMarker,
}

impl DomainSpec {
    /// Robin portion given by `robin`, Dirichlet portion its complement.
    pub fn new(shape: Shape, robin: BoundaryMarker) -> Result<Self> {
        let dirichlet = robin.clone().complement();
        Self::with_portions(shape, robin, dirichlet)
    }

    /// Explicit portions; validates the partition on boundary samples and,
    /// for bounded domains, that the Dirichlet portion is nonempty.
    pub fn with_portions(
        shape: Shape,
        robin: BoundaryMarker,
        dirichlet: BoundaryMarker,
    ) -> Result<Self> {
        let spec = DomainSpec { shape, robin, dirichlet };
        let samples = spec.shape.boundary_samples();
        for p in &samples {
            let r = spec.robin.holds(&spec.shape, *p);
            let d = spec.dirichlet.holds(&spec.shape, *p);
            if r == d {
                return Err(Error::DecompositionViolation {
                    point: [p.x, p.y],
                    detail: if r {
                        "both portions claim this point".into()
                    } else {
                        "neither portion claims this point".into()
                    },
                });
            }
        }
        if spec.shape.is_bounded()
            && !samples.is_empty()
            && !samples.iter().any(|p| spec.dirichlet.holds(&spec.shape, *p))
        {
            return Err(Error::InvalidGeometry(
                "bounded domain requires a nonempty Dirichlet portion".into(),
            ));
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }
}

/// Tags every non-Cut boundary facet by evaluating the portion predicates at
/// its midpoint. Cut facets keep their tag.
pub fn tag_boundary(mesh: &MeshedDomain, spec: &DomainSpec) -> Result<MeshedDomain> {
    let mut out = mesh.clone();
    for (idx, facet) in out.boundary_facets.iter_mut().enumerate() {
        if facet.tag == BoundaryTag::Cut {
            continue;
        }
        let m = mesh.facet_midpoint(facet);
        if !spec.shape.on_boundary(m, ON_BOUNDARY_TOL) {
            return Err(Error::InvalidGeometry(format!(
                "facet {idx} midpoint ({}, {}) is not on the domain boundary",
                m.x, m.y
            )));
        }
        let r = spec.robin.holds(&spec.shape, m);
        let d = spec.dirichlet.holds(&spec.shape, m);
        facet.tag = match (r, d) {
            (true, false) => BoundaryTag::Robin,
            (false, true) => BoundaryTag::Dirichlet,
            _ => {
                return Err(Error::DecompositionViolation {
                    point: [m.x, m.y],
                    detail: if r {
                        "both portions claim this facet midpoint".into()
                    } else {
                        "neither portion claims this facet midpoint".into()
                    },
                })
            }
        };
    }
    Ok(out)
}

/// One side of a truncation window as a function of the level `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Growth {
    Fixed(f64),
    /// `scale * ratio^k`
    Geometric { scale: f64, ratio: f64 },
    /// `scale * k`
    Linear(f64),
    /// `scale / k`
    Recip(f64),
    /// `scale / k^2`
    RecipSq(f64),
}

impl Growth {
    pub fn at(&self, k: u32) -> f64 {
        let kf = k as f64;
        match self {
            Growth::Fixed(c) => *c,
            Growth::Geometric { scale, ratio } => scale * ratio.powi(k as i32),
            Growth::Linear(c) => c * kf,
            Growth::Recip(c) => c / kf,
            Growth::RecipSq(c) => c / (kf * kf),
        }
    }
}

/// Axis-aligned truncation window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    Interval { lo: f64, hi: f64 },
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Window {
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        match self {
            Window::Interval { lo, hi } => p.x >= lo - tol && p.x <= hi + tol,
            Window::Box { x0, x1, y0, y1 } => {
                p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol
            }
        }
    }

    pub fn on_boundary(&self, p: Point, tol: f64) -> bool {
        match self {
            Window::Interval { lo, hi } => (p.x - lo).abs() <= tol || (p.x - hi).abs() <= tol,
            Window::Box { x0, x1, y0, y1 } => {
                self.contains(p, tol)
                    && ((p.x - x0).abs() <= tol
                        || (p.x - x1).abs() <= tol
                        || (p.y - y0).abs() <= tol
                        || (p.y - y1).abs() <= tol)
            }
        }
    }

    fn included_in(&self, other: &Window) -> bool {
        match (self, other) {
            (Window::Interval { lo, hi }, Window::Interval { lo: l2, hi: h2 }) => {
                lo >= l2 && hi <= h2
            }
            (
                Window::Box { x0, x1, y0, y1 },
                Window::Box { x0: a0, x1: a1, y0: b0, y1: b1 },
            ) => x0 >= a0 && x1 <= a1 && y0 >= b0 && y1 <= b1,
            _ => false,
        }
    }
}

/// Window family `k -> W_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum WindowRule {
    Interval { left: Growth, right: Growth },
    Box { x_lo: Growth, x_hi: Growth, y_lo: Growth, y_hi: Growth },
}

impl WindowRule {
    pub fn window(&self, k: u32) -> Window {
        match self {
            WindowRule::Interval { left, right } => Window::Interval {
                lo: left.at(k),
                hi: right.at(k),
            },
            WindowRule::Box { x_lo, x_hi, y_lo, y_hi } => Window::Box {
                x0: x_lo.at(k),
                x1: x_hi.at(k),
                y0: y_lo.at(k),
                y1: y_hi.at(k),
            },
        }
    }
}

/// Target mesh size `k -> h_k`, nonincreasing in `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeshRule {
    FixedH(f64),
    /// `h0 * ratio^(k-1)` with `ratio <= 1`.
    Geometric { h0: f64, ratio: f64 },
}

impl MeshRule {
    pub fn h(&self, k: u32) -> f64 {
        match self {
            MeshRule::FixedH(h) => *h,
            MeshRule::Geometric { h0, ratio } => h0 * ratio.powi(k as i32 - 1),
        }
    }
}

/// Exhaustion family `Omega_k = Omega intersect W_k`.
#[derive(Clone, Debug)]
pub struct ExhaustionSpec {
    pub base: DomainSpec,
    pub windows: WindowRule,
    pub mesh: MeshRule,
}

impl ExhaustionSpec {
    pub fn new(base: DomainSpec, windows: WindowRule, mesh: MeshRule) -> Self {
        ExhaustionSpec { base, windows, mesh }
    }

    /// `W_k subset W_{k+1}` and `h_k` nonincreasing.
    pub fn check_nesting(&self, k: u32) -> Result<()> {
        let wk = self.windows.window(k);
        let wk1 = self.windows.window(k + 1);
        if !wk.included_in(&wk1) {
            return Err(Error::Consistency {
                level: k as usize,
                detail: format!("window {wk:?} is not contained in {wk1:?}"),
            });
        }
        if self.mesh.h(k + 1) > self.mesh.h(k) + ON_BOUNDARY_TOL {
            return Err(Error::Consistency {
                level: k as usize,
                detail: "mesh sizes must be nonincreasing".into(),
            });
        }
        Ok(())
    }
}

/// Meshes `Omega intersect W_k`, tags genuine boundary by the spec's
/// predicates and truncation boundary as Cut, and enforces the polygonal
/// transversality condition between Cut and Robin facets.
pub fn make_exhaustion(spec: &ExhaustionSpec, k: u32) -> Result<MeshedDomain> {
    if k == 0 {
        return Err(Error::Misuse("exhaustion levels start at k = 1".into()));
    }
    let window = spec.windows.window(k);
    let h_target = spec.mesh.h(k);
    if !(h_target > 0.0) {
        return Err(Error::InvalidGeometry("mesh size must be positive".into()));
    }
    let mesh = match (&spec.base.shape, window) {
        (Shape::Interval { a, b }, Window::Interval { lo, hi }) => {
            let lo = lo.max(*a);
            let hi = hi.min(*b);
            if !(hi - lo > 0.0) {
                return Err(Error::InvalidGeometry(
                    "window does not intersect the domain".into(),
                ));
            }
            let n = ((hi - lo) / h_target).ceil() as usize;
            let mut mesh = build_interval_mesh(lo, hi, n.max(2))?;
            for facet in mesh.boundary_facets.iter_mut() {
                let p = Point::on_axis(mesh.vertices[facet.nodes()[0]].x);
                if !spec.base.shape.on_boundary(p, ON_BOUNDARY_TOL) {
                    facet.tag = BoundaryTag::Cut;
                }
            }
            mesh
        }
        (Shape::Polygon(verts), Window::Box { .. }) => {
            let clipped = polygon::clip_polygon_to_window(verts, &window)?;
            mesh_clipped(spec, &clipped, &window, h_target)?
        }
        (Shape::HalfSpaces(hs), Window::Box { .. }) => {
            let clipped = polygon::clip_halfspaces_to_window(hs, &window)?;
            mesh_clipped(spec, &clipped, &window, h_target)?
        }
        _ => {
            return Err(Error::InvalidGeometry(
                "window dimension does not match the domain shape".into(),
            ))
        }
    };
    let tagged = tag_boundary(&mesh, &spec.base)?;
    if !tagged.is_connected() {
        return Err(Error::InvalidGeometry(format!(
            "window at level {k} meets the domain in a disconnected set"
        )));
    }
    check_transversality(&tagged)?;
    Ok(tagged)
}

fn mesh_clipped(
    spec: &ExhaustionSpec,
    clipped: &[Point],
    window: &Window,
    h_target: f64,
) -> Result<MeshedDomain> {
    let mut mesh = build_polygon_mesh(clipped, h_target)?;
    for (idx, facet) in mesh.boundary_facets.clone().iter().enumerate() {
        let m = mesh.facet_midpoint(facet);
        if spec.base.shape.on_boundary(m, ON_BOUNDARY_TOL) {
            continue; // genuine boundary, tagged later
        }
        if window.on_boundary(m, ON_BOUNDARY_TOL) {
            mesh.boundary_facets[idx].tag = BoundaryTag::Cut;
        } else {
            return Err(Error::InvalidGeometry(format!(
                "facet midpoint ({}, {}) lies on neither the domain nor the window boundary",
                m.x, m.y
            )));
        }
    }
    Ok(mesh)
}

/// No Cut facet may be (near-)collinear with a Robin facet sharing one of
/// its vertices. Trivially satisfied in 1D where facets are points.
pub fn check_transversality(mesh: &MeshedDomain) -> Result<()> {
    if mesh.dim == 1 {
        return Ok(());
    }
    let cuts: Vec<&BoundaryFacet> = mesh
        .boundary_facets
        .iter()
        .filter(|f| f.tag == BoundaryTag::Cut)
        .collect();
    let robins: Vec<&BoundaryFacet> = mesh
        .boundary_facets
        .iter()
        .filter(|f| f.tag == BoundaryTag::Robin)
        .collect();
    for c in &cuts {
        for r in &robins {
            let shared: Vec<usize> = c
                .nodes()
                .iter()
                .filter(|v| r.nodes().contains(v))
                .copied()
                .collect();
            if shared.is_empty() {
                continue;
            }
            let angle = facet_angle(mesh, c, r);
            if angle < TRANSVERSALITY_TOL_RAD {
                let p = mesh.vertices[shared[0]];
                return Err(Error::Transversality { point: [p.x, p.y], angle });
            }
        }
    }
    Ok(())
}

/// Acute angle between the lines carrying two edge facets.
fn facet_angle(mesh: &MeshedDomain, f1: &BoundaryFacet, f2: &BoundaryFacet) -> f64 {
    let d = |f: &BoundaryFacet| {
        let a = mesh.vertices[f.nodes()[0]];
        let b = mesh.vertices[f.nodes()[1]];
        (b.x - a.x, b.y - a.y)
    };
    let (ux, uy) = d(f1);
    let (vx, vy) = d(f2);
    let dot = (ux * vx + uy * vy).abs();
    let nu = ux.hypot(uy);
    let nv = vx.hypot(vy);
    (dot / (nu * nv)).clamp(0.0, 1.0).acos()
}
