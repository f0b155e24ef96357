//! Uniform 1D meshes.

use super::{BoundaryFacet, BoundaryTag, Element, MeshedDomain, Point};
use crate::error::{Error, Result};

/// Uniform partition of `(a, b)` into `n` segments. The two boundary facets
/// stay untagged until [`super::tag_boundary`] runs.
pub fn build_interval_mesh(a: f64, b: f64, n: usize) -> Result<MeshedDomain> {
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(Error::InvalidGeometry(format!(
            "interval ({a}, {b}) is empty or unbounded"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidGeometry(format!(
            "interval mesh needs at least 2 segments, got {n}"
        )));
    }
    let h = (b - a) / n as f64;
    let vertices: Vec<Point> = (0..=n)
        .map(|i| {
            // Exact endpoints; interior nodes by scaled index.
            if i == n {
                Point::on_axis(b)
            } else {
                Point::on_axis(a + i as f64 * h)
            }
        })
        .collect();
    let elements: Vec<Element> = (0..n).map(|i| Element::segment(i, i + 1)).collect();
    let boundary_facets = vec![
        BoundaryFacet::vertex(0, BoundaryTag::Untagged),
        BoundaryFacet::vertex(n, BoundaryTag::Untagged),
    ];
    Ok(MeshedDomain { dim: 1, vertices, elements, boundary_facets, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_partition() {
        let mesh = build_interval_mesh(0.0, 1.0, 4).unwrap();
        let xs: Vec<f64> = mesh.vertices.iter().map(|v| v.x).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(mesh.elements.len(), 4);
        assert_eq!(mesh.boundary_facets.len(), 2);
    }

    #[test]
    fn h_is_segment_length() {
        let mesh = build_interval_mesh(0.0, std::f64::consts::PI, 1000).unwrap();
        assert!((mesh.h - std::f64::consts::PI / 1000.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_interval() {
        let mesh = build_interval_mesh(-2.0, 2.0, 2).unwrap();
        let xs: Vec<f64> = mesh.vertices.iter().map(|v| v.x).collect();
        assert_eq!(xs, vec![-2.0, 0.0, 2.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_interval_mesh(1.0, 0.0, 4),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            build_interval_mesh(0.0, 1.0, 1),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn positive_measure_and_derived_boundary() {
        let mesh = build_interval_mesh(-1.0, 3.0, 7).unwrap();
        for e in &mesh.elements {
            assert!(mesh.element_measure(e) > 0.0);
        }
        let derived = mesh.derive_boundary_facets();
        assert_eq!(derived, vec![vec![0], vec![7]]);
    }
}
