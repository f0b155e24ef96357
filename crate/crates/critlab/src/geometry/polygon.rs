//! 2D polygon meshing and window clipping.

use std::collections::HashMap;

use super::{BoundaryFacet, BoundaryTag, Element, HalfSpace, MeshedDomain, Point, Window};
use crate::error::{Error, Result};

/// Conforming triangulation of a simple polygon with element diameters at
/// most `2 * h_target`. Axis-aligned rectangles use the structured split
/// into right isosceles triangles, which yields an M-matrix for the
/// Laplacian; general polygons are ear-clipped and uniformly refined.
pub fn build_polygon_mesh(polygon: &[Point], h_target: f64) -> Result<MeshedDomain> {
    if !(h_target > 0.0) {
        return Err(Error::InvalidGeometry("h_target must be positive".into()));
    }
    let verts = normalize_loop(polygon)?;
    let mut mesh = if let Some([x0, x1, y0, y1]) = as_axis_rectangle(&verts) {
        structured_rectangle(x0, x1, y0, y1, h_target)
    } else {
        let tris = ear_clip(&verts)?;
        let mut mesh = mesh_from_triangles(verts, tris);
        while mesh.max_diameter() > 2.0 * h_target {
            mesh = refine_uniform(&mesh);
        }
        mesh
    };
    mesh.h = mesh.max_diameter();
    attach_boundary(&mut mesh);
    Ok(mesh)
}

/// Drops duplicate/collinear vertices, enforces counterclockwise order, and
/// rejects self-intersecting loops.
fn normalize_loop(polygon: &[Point]) -> Result<Vec<Point>> {
    let mut verts: Vec<Point> = Vec::new();
    for &p in polygon {
        if verts.last().map_or(true, |q: &Point| q.dist(&p) > 1e-12) {
            verts.push(p);
        }
    }
    while verts.len() > 1 && verts[0].dist(verts.last().unwrap()) <= 1e-12 {
        verts.pop();
    }
    // Remove collinear interior vertices.
    let mut cleaned: Vec<Point> = Vec::new();
    let n = verts.len();
    for i in 0..n {
        let a = verts[(i + n - 1) % n];
        let b = verts[i];
        let c = verts[(i + 1) % n];
        let cross = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        let scale = a.dist(&b).max(b.dist(&c)).max(1.0);
        if cross.abs() > 1e-12 * scale * scale {
            cleaned.push(b);
        }
    }
    let verts = cleaned;
    if verts.len() < 3 {
        return Err(Error::InvalidGeometry(
            "polygon needs at least 3 non-collinear vertices".into(),
        ));
    }
    if signed_area(&verts) == 0.0 {
        return Err(Error::InvalidGeometry("polygon has zero area".into()));
    }
    let verts = if signed_area(&verts) < 0.0 {
        verts.into_iter().rev().collect()
    } else {
        verts
    };
    // Self-intersection: any two non-adjacent edges crossing.
    let n = verts.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (a, b) = (verts[i], verts[(i + 1) % n]);
            let (c, d) = (verts[j], verts[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(Error::InvalidGeometry(format!(
                    "polygon edges {i} and {j} intersect"
                )));
            }
        }
    }
    Ok(verts)
}

fn signed_area(verts: &[Point]) -> f64 {
    let n = verts.len();
    0.5 * (0..n)
        .map(|i| {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    false
}

/// Recognizes axis-aligned rectangles given as a 4-vertex loop.
fn as_axis_rectangle(verts: &[Point]) -> Option<[f64; 4]> {
    if verts.len() != 4 {
        return None;
    }
    let xs: Vec<f64> = verts.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = verts.iter().map(|p| p.y).collect();
    let x0 = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x1 = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y0 = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let y1 = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let corner = |p: &Point| {
        ((p.x - x0).abs() <= 1e-12 || (p.x - x1).abs() <= 1e-12)
            && ((p.y - y0).abs() <= 1e-12 || (p.y - y1).abs() <= 1e-12)
    };
    if verts.iter().all(corner) {
        Some([x0, x1, y0, y1])
    } else {
        None
    }
}

/// nx-by-ny grid of cells, each split along the same diagonal into two right
/// isosceles triangles.
fn structured_rectangle(x0: f64, x1: f64, y0: f64, y1: f64, h_target: f64) -> MeshedDomain {
    let nx = (((x1 - x0) / h_target).ceil() as usize).max(1);
    let ny = (((y1 - y0) / h_target).ceil() as usize).max(1);
    let hx = (x1 - x0) / nx as f64;
    let hy = (y1 - y0) / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { x1 } else { x0 + i as f64 * hx };
            let y = if j == ny { y1 } else { y0 + j as f64 * hy };
            vertices.push(Point::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.push(Element::triangle(a, b, c));
            elements.push(Element::triangle(a, c, d));
        }
    }
    MeshedDomain { dim: 2, vertices, elements, boundary_facets: Vec::new(), h: hx.hypot(hy) }
}

fn ear_clip(verts: &[Point]) -> Result<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..verts.len()).collect();
    let mut tris = Vec::new();
    let mut guard = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ip, ic, inx) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (verts[ip], verts[ic], verts[inx]);
            if orient(a, b, c) <= 0.0 {
                continue; // reflex corner
            }
            let mut empty = true;
            for &other in &idx {
                if other == ip || other == ic || other == inx {
                    continue;
                }
                if point_in_triangle(verts[other], a, b, c) {
                    empty = false;
                    break;
                }
            }
            if empty {
                tris.push([ip, ic, inx]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(Error::InvalidGeometry(
                "ear clipping failed; polygon is likely not simple".into(),
            ));
        }
        guard += 1;
        if guard > 10 * verts.len() * verts.len() {
            return Err(Error::InvalidGeometry("ear clipping did not terminate".into()));
        }
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

fn point_in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    let d1 = orient(a, b, p);
    let d2 = orient(b, c, p);
    let d3 = orient(c, a, p);
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

fn mesh_from_triangles(vertices: Vec<Point>, tris: Vec<[usize; 3]>) -> MeshedDomain {
    let elements = tris
        .into_iter()
        .map(|[a, b, c]| Element::triangle(a, b, c))
        .collect();
    MeshedDomain { dim: 2, vertices, elements, boundary_facets: Vec::new(), h: 0.0 }
}

/// Splits every triangle into four via edge midpoints (conforming).
fn refine_uniform(mesh: &MeshedDomain) -> MeshedDomain {
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |i: usize, j: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (i.min(j), i.max(j));
        *midpoint.entry(key).or_insert_with(|| {
            let p = Point::new(
                0.5 * (vertices[i].x + vertices[j].x),
                0.5 * (vertices[i].y + vertices[j].y),
            );
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut elements = Vec::with_capacity(4 * mesh.elements.len());
    for e in &mesh.elements {
        let n = e.nodes();
        let (a, b, c) = (n[0], n[1], n[2]);
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        elements.push(Element::triangle(a, ab, ca));
        elements.push(Element::triangle(ab, b, bc));
        elements.push(Element::triangle(ca, bc, c));
        elements.push(Element::triangle(ab, bc, ca));
    }
    MeshedDomain {
        dim: 2,
        vertices,
        elements,
        boundary_facets: Vec::new(),
        h: 0.5 * mesh.h,
    }
}

/// Rebuilds `boundary_facets` as the element edges used exactly once,
/// untagged.
fn attach_boundary(mesh: &mut MeshedDomain) {
    let mut count: HashMap<(usize, usize), ((usize, usize), usize)> = HashMap::new();
    for e in &mesh.elements {
        let n = e.nodes();
        for (i, j) in [(n[0], n[1]), (n[1], n[2]), (n[2], n[0])] {
            let key = (i.min(j), i.max(j));
            let entry = count.entry(key).or_insert(((i, j), 0));
            entry.1 += 1;
        }
    }
    let mut facets: Vec<(usize, usize)> = count
        .into_iter()
        .filter(|(_, (_, c))| *c == 1)
        .map(|(_, (edge, _))| edge)
        .collect();
    facets.sort();
    mesh.boundary_facets = facets
        .into_iter()
        .map(|(i, j)| BoundaryFacet::edge(i, j, BoundaryTag::Untagged))
        .collect();
}

/// Sutherland-Hodgman clip of a polygon loop against one half-space.
fn clip_by_halfspace(subject: &[Point], hs: &HalfSpace) -> Vec<Point> {
    let value = |p: Point| hs.a * p.x + hs.b * p.y - hs.c;
    let mut out = Vec::new();
    let n = subject.len();
    for i in 0..n {
        let s = subject[i];
        let e = subject[(i + 1) % n];
        let vs = value(s);
        let ve = value(e);
        let s_in = vs <= 0.0;
        let e_in = ve <= 0.0;
        let cross = |a: Point, b: Point, va: f64, vb: f64| {
            let t = va / (va - vb);
            Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        };
        if e_in {
            if !s_in {
                out.push(cross(s, e, vs, ve));
            }
            out.push(e);
        } else if s_in {
            out.push(cross(s, e, vs, ve));
        }
    }
    out
}

fn window_halfspaces(window: &Window) -> Vec<HalfSpace> {
    match *window {
        Window::Box { x0, x1, y0, y1 } => vec![
            HalfSpace { a: -1.0, b: 0.0, c: -x0 },
            HalfSpace { a: 1.0, b: 0.0, c: x1 },
            HalfSpace { a: 0.0, b: -1.0, c: -y0 },
            HalfSpace { a: 0.0, b: 1.0, c: y1 },
        ],
        Window::Interval { .. } => unreachable!("1D windows never reach polygon clipping"),
    }
}

fn finish_clip(mut poly: Vec<Point>) -> Result<Vec<Point>> {
    // Drop near-duplicate consecutive points left by clipping.
    let mut cleaned: Vec<Point> = Vec::new();
    for p in poly.drain(..) {
        if cleaned.last().map_or(true, |q: &Point| q.dist(&p) > 1e-12) {
            cleaned.push(p);
        }
    }
    while cleaned.len() > 1 && cleaned[0].dist(cleaned.last().unwrap()) <= 1e-12 {
        cleaned.pop();
    }
    if cleaned.len() < 3 || signed_area(&cleaned).abs() < 1e-24 {
        return Err(Error::InvalidGeometry(
            "window does not intersect the domain".into(),
        ));
    }
    Ok(cleaned)
}

pub(super) fn clip_polygon_to_window(verts: &[Point], window: &Window) -> Result<Vec<Point>> {
    let mut poly = normalize_loop(verts)?;
    for hs in window_halfspaces(window) {
        poly = clip_by_halfspace(&poly, &hs);
        if poly.len() < 3 {
            return Err(Error::InvalidGeometry(
                "window does not intersect the domain".into(),
            ));
        }
    }
    finish_clip(poly)
}

pub(super) fn clip_halfspaces_to_window(
    halfspaces: &[HalfSpace],
    window: &Window,
) -> Result<Vec<Point>> {
    let mut poly: Vec<Point> = match *window {
        Window::Box { x0, x1, y0, y1 } => vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ],
        Window::Interval { .. } => unreachable!(),
    };
    for hs in halfspaces {
        poly = clip_by_halfspace(&poly, hs);
        if poly.len() < 3 {
            return Err(Error::InvalidGeometry(
                "window does not intersect the domain".into(),
            ));
        }
    }
    finish_clip(poly)
}
