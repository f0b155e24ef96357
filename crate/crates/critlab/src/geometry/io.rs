//! Mesh text format, one record per line:
//!
//! ```text
//! v x [y]
//! e i j [k]
//! b i [j] TAG
//! ```
//!
//! with 0-based indices and `TAG` one of `R`, `D`, `C`. Writers emit exactly
//! this; readers reject anything else. Floats round-trip exactly.

use super::{BoundaryFacet, BoundaryTag, Element, MeshedDomain, Point};
use crate::error::{Error, Result};

pub fn write_mesh(mesh: &MeshedDomain) -> Result<String> {
    let mut out = String::new();
    for v in &mesh.vertices {
        if mesh.dim == 1 {
            out.push_str(&format!("v {}\n", v.x));
        } else {
            out.push_str(&format!("v {} {}\n", v.x, v.y));
        }
    }
    for e in &mesh.elements {
        let n = e.nodes();
        if n.len() == 2 {
            out.push_str(&format!("e {} {}\n", n[0], n[1]));
        } else {
            out.push_str(&format!("e {} {} {}\n", n[0], n[1], n[2]));
        }
    }
    for f in &mesh.boundary_facets {
        let tag = match f.tag {
            BoundaryTag::Robin => "R",
            BoundaryTag::Dirichlet => "D",
            BoundaryTag::Cut => "C",
            BoundaryTag::Untagged => {
                return Err(Error::UntaggedFacet { facet: 0 });
            }
        };
        let n = f.nodes();
        if n.len() == 1 {
            out.push_str(&format!("b {} {}\n", n[0], tag));
        } else {
            out.push_str(&format!("b {} {} {}\n", n[0], n[1], tag));
        }
    }
    Ok(out)
}

pub fn read_mesh(text: &str) -> Result<MeshedDomain> {
    let mut vertices: Vec<Point> = Vec::new();
    let mut elements: Vec<Element> = Vec::new();
    let mut boundary_facets: Vec<BoundaryFacet> = Vec::new();
    let mut dim: Option<usize> = None;
    let bad = |line: usize, detail: &str| -> Error {
        Error::Io(format!("mesh format error on line {}: {detail}", line + 1))
    };
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "v" => {
                let coords = &fields[1..];
                let d = coords.len();
                if d != 1 && d != 2 {
                    return Err(bad(ln, "vertex must have 1 or 2 coordinates"));
                }
                if *dim.get_or_insert(d) != d {
                    return Err(bad(ln, "inconsistent vertex dimension"));
                }
                let x: f64 = coords[0].parse().map_err(|_| bad(ln, "bad coordinate"))?;
                let y: f64 = if d == 2 {
                    coords[1].parse().map_err(|_| bad(ln, "bad coordinate"))?
                } else {
                    0.0
                };
                vertices.push(Point::new(x, y));
            }
            "e" => {
                let idx: Vec<usize> = fields[1..]
                    .iter()
                    .map(|s| s.parse().map_err(|_| bad(ln, "bad element index")))
                    .collect::<Result<_>>()?;
                match (dim, idx.len()) {
                    (Some(1), 2) => elements.push(Element::segment(idx[0], idx[1])),
                    (Some(2), 3) => elements.push(Element::triangle(idx[0], idx[1], idx[2])),
                    _ => return Err(bad(ln, "element arity does not match dimension")),
                }
            }
            "b" => {
                let n = fields.len();
                if n < 3 {
                    return Err(bad(ln, "boundary record too short"));
                }
                let tag = match fields[n - 1] {
                    "R" => BoundaryTag::Robin,
                    "D" => BoundaryTag::Dirichlet,
                    "C" => BoundaryTag::Cut,
                    other => return Err(bad(ln, &format!("unknown tag `{other}`"))),
                };
                let idx: Vec<usize> = fields[1..n - 1]
                    .iter()
                    .map(|s| s.parse().map_err(|_| bad(ln, "bad facet index")))
                    .collect::<Result<_>>()?;
                match (dim, idx.len()) {
                    (Some(1), 1) => boundary_facets.push(BoundaryFacet::vertex(idx[0], tag)),
                    (Some(2), 2) => {
                        boundary_facets.push(BoundaryFacet::edge(idx[0], idx[1], tag))
                    }
                    _ => return Err(bad(ln, "facet arity does not match dimension")),
                }
            }
            other => return Err(bad(ln, &format!("unknown record `{other}`"))),
        }
    }
    let dim = dim.ok_or_else(|| Error::Io("mesh file has no vertices".into()))?;
    let nv = vertices.len();
    for e in &elements {
        if e.nodes().iter().any(|&i| i >= nv) {
            return Err(Error::Io("element index out of range".into()));
        }
    }
    for f in &boundary_facets {
        if f.nodes().iter().any(|&i| i >= nv) {
            return Err(Error::Io("facet index out of range".into()));
        }
    }
    let mut mesh = MeshedDomain { dim, vertices, elements, boundary_facets, h: 0.0 };
    mesh.h = mesh.max_diameter();
    Ok(mesh)
}
