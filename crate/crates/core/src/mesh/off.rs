//! OFF reader and writer for triangulated surfaces.

use std::fmt::Write as _;

use super::{Mesh, MeshGeometry, SimplicialComplex};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parse OFF text into a validated 2-dimensional mesh.
pub fn load_off(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    });
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if header != "OFF" {
        return Err(parse_err(ln, format!("expected `OFF`, found `{header}`")));
    }
    let (ln, counts) = lines.next().ok_or_else(|| parse_err(ln, "missing counts line"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad count `{t}`"))))
        .collect::<Result<_>>()?;
    if counts.len() != 3 {
        return Err(parse_err(ln, "counts line must be `V F E`"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut coords = Vec::with_capacity(nv);
    for k in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {nv} vertices, found {k}")))?;
        let xyz: Vec<f64> = l
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| parse_err(ln, format!("bad coordinate `{t}`")))
            })
            .collect::<Result<_>>()?;
        if xyz.len() != 3 {
            return Err(parse_err(ln, "vertex line must have 3 coordinates"));
        }
        coords.push(xyz);
    }
    let mut faces = Vec::with_capacity(nf);
    let mut used = vec![false; nv];
    for k in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {nf} faces, found {k}")))?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad index `{t}`"))))
            .collect::<Result<_>>()?;
        if ids.first() != Some(&3) || ids.len() != 4 {
            return Err(parse_err(ln, "only triangular faces `3 a b c` are supported"));
        }
        for &v in &ids[1..] {
            if v >= nv {
                return Err(parse_err(ln, format!("face references nonexistent vertex {v}")));
            }
            used[v] = true;
        }
        faces.push(ids[1..].to_vec());
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "unexpected trailing content"));
    }
    if let Some(v) = used.iter().position(|&u| !u) {
        return Err(Error::InvalidMesh(format!("vertex {v} is not used by any face")));
    }
    let complex = SimplicialComplex::from_top_simplices(2, &faces)?;
    Mesh::new(complex, MeshGeometry::from_coords(coords))
}

/// Serialize an embedded triangle mesh as OFF text.
pub fn write_off(mesh: &Mesh) -> Result<String> {
    let coords = mesh
        .geometry
        .vertex_coords
        .as_ref()
        .ok_or_else(|| Error::InvalidMesh("OFF output needs vertex coordinates".into()))?;
    let c = &mesh.complex;
    if c.dim() != 2 {
        return Err(Error::InvalidMesh("OFF output needs a triangle mesh".into()));
    }
    let mut out = String::from("OFF\n");
    let _ = writeln!(out, "{} {} {}", coords.len(), c.count(2), c.count(1));
    for p in coords {
        let z = p.get(2).copied().unwrap_or(0.0);
        let _ = writeln!(out, "{} {} {}", p[0], p.get(1).copied().unwrap_or(0.0), z);
    }
    for (t, &s) in c.simplices(2).iter().zip(c.orientation()) {
        let (a, b) = if s > 0 { (t[1], t[2]) } else { (t[2], t[1]) };
        let _ = writeln!(out, "3 {} {} {}", t[0], a, b);
    }
    Ok(out)
}
