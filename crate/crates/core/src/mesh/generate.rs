//! Test geometries: planar annulus, flat torus, punctured flat torus.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{Mesh, MeshGeometry, SimplicialComplex};
use crate::error::{Error, Result};

/// Split each grid cell (a, b, c, e) into the triangles (a, b, c) and (a, c, e).
fn split_cell(a: usize, b: usize, c: usize, e: usize) -> [Vec<usize>; 2] {
    [vec![a, b, c], vec![a, c, e]]
}

/// Planar annulus with `radial + 1` rings of `angular` vertices.
pub fn generate_annulus(radial: usize, angular: usize, r_inner: f64, r_outer: f64) -> Result<Mesh> {
    if radial < 1 {
        return Err(Error::InvalidMesh("radial_divisions must be at least 1".into()));
    }
    if angular < 3 {
        return Err(Error::InvalidMesh("angular_divisions must be at least 3".into()));
    }
    if !(r_inner > 0.0 && r_inner.is_finite() && r_outer.is_finite() && r_inner < r_outer) {
        return Err(Error::InvalidMesh(format!(
            "radii must satisfy 0 < r_inner < r_outer (got {r_inner}, {r_outer})"
        )));
    }
    let vid = |i: usize, j: usize| i * angular + j % angular;
    let mut coords = Vec::with_capacity((radial + 1) * angular);
    for i in 0..=radial {
        let r = r_inner + (r_outer - r_inner) * i as f64 / radial as f64;
        for j in 0..angular {
            let t = 2.0 * PI * j as f64 / angular as f64;
            coords.push(vec![r * t.cos(), r * t.sin()]);
        }
    }
    let mut tops = Vec::with_capacity(2 * radial * angular);
    for i in 0..radial {
        for j in 0..angular {
            tops.extend(split_cell(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)));
        }
    }
    let complex = SimplicialComplex::from_top_simplices(2, &tops)?;
    Mesh::new(complex, MeshGeometry::from_coords(coords))
}

fn torus_cells(divisions: usize, hole: usize) -> Result<Mesh> {
    let d = divisions;
    let vid = |i: usize, j: usize| (i % d) * d + j % d;
    let h = 1.0 / d as f64;
    let mut tops = Vec::new();
    let mut lengths = HashMap::new();
    for i in 0..d {
        for j in 0..d {
            if i < hole && j < hole {
                continue;
            }
            let local = [(0, 0), (1, 0), (1, 1), (0, 1)];
            let ids: Vec<usize> = local.iter().map(|&(a, b)| vid(i + a, j + b)).collect();
            for t in split_cell(ids[0], ids[1], ids[2], ids[3]) {
                for x in 0..3 {
                    for y in x + 1..3 {
                        let (u, w) = (t[x], t[y]);
                        let pu = local[ids.iter().position(|&v| v == u).unwrap()];
                        let pw = local[ids.iter().position(|&v| v == w).unwrap()];
                        let dx = (pu.0 as f64 - pw.0 as f64).abs();
                        let dy = (pu.1 as f64 - pw.1 as f64).abs();
                        lengths.insert((u.min(w), u.max(w)), h * dx.hypot(dy));
                    }
                }
                tops.push(t);
            }
        }
    }
    let complex = SimplicialComplex::from_top_simplices(2, &tops)?;
    Mesh::new(complex, MeshGeometry::from_edge_lengths(lengths))
}

/// Unit-area flat square torus on a `divisions x divisions` grid.
pub fn generate_flat_torus(divisions: usize) -> Result<Mesh> {
    if divisions < 3 {
        return Err(Error::InvalidMesh(format!(
            "flat torus needs at least 3 divisions (got {divisions})"
        )));
    }
    torus_cells(divisions, 0)
}

/// Flat torus with an `hole x hole` block of grid cells removed.
pub fn generate_punctured_torus(divisions: usize, hole: usize) -> Result<Mesh> {
    if divisions < 3 {
        return Err(Error::InvalidMesh(format!(
            "punctured torus needs at least 3 divisions (got {divisions})"
        )));
    }
    if hole < 1 || hole + 2 > divisions {
        return Err(Error::InvalidMesh(format!(
            "hole of {hole} cells does not leave a connected complement with one boundary circle \
             (need 1 <= hole <= {})",
            divisions - 2
        )));
    }
    let mesh = torus_cells(divisions, hole)?;
    let boundary_components = mesh.complex.boundary().map_or(0, |b| b.complex.connected_components());
    if mesh.complex.connected_components() != 1 || boundary_components != 1 {
        return Err(Error::InvalidMesh("hole disconnects the torus".into()));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{betti_numbers, relative_betti_numbers};

    #[test]
    fn smallest_annulus() {
        let m = generate_annulus(1, 3, 1.0, 2.0).unwrap();
        assert_eq!(m.complex.count(2), 6);
        assert_eq!(m.complex.euler_characteristic(), 0);
    }

    #[test]
    fn annulus_has_two_boundary_circles() {
        let m = generate_annulus(2, 8, 1.0, 2.0).unwrap();
        assert_eq!(m.complex.euler_characteristic(), 0);
        assert_eq!(m.complex.boundary().unwrap().complex.connected_components(), 2);
        assert_eq!(betti_numbers(&m.complex), vec![1, 1, 0]);
        assert_eq!(relative_betti_numbers(&m.complex), vec![0, 1, 1]);
    }

    #[test]
    fn annulus_parameter_errors() {
        assert!(generate_annulus(1, 2, 1.0, 2.0).is_err());
        assert!(generate_annulus(0, 4, 1.0, 2.0).is_err());
        assert!(generate_annulus(1, 4, 2.0, 1.0).is_err());
    }

    #[test]
    fn punctured_torus_homology() {
        let m = generate_punctured_torus(8, 2).unwrap();
        assert_eq!(betti_numbers(&m.complex), vec![1, 2, 0]);
        assert_eq!(relative_betti_numbers(&m.complex), vec![0, 2, 1]);
        let m = generate_punctured_torus(3, 1).unwrap();
        assert_eq!(m.complex.boundary().unwrap().complex.connected_components(), 1);
        assert!(generate_punctured_torus(8, 60).is_err());
        assert!(generate_punctured_torus(8, 7).is_err());
    }

    #[test]
    fn flat_torus_is_closed() {
        let m = generate_flat_torus(3).unwrap();
        assert!(m.complex.is_closed());
        assert_eq!(m.complex.euler_characteristic(), 0);
        assert_eq!(betti_numbers(&m.complex), vec![1, 2, 1]);
        assert!((m.total_volume() - 1.0).abs() < 1e-12);
        assert!(generate_flat_torus(2).is_err());
    }
}
