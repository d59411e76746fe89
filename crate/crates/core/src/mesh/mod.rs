//! Oriented simplicial complexes with boundary.
//!
//! Every p-simplex is stored as its sorted vertex tuple, which fixes its
//! orientation. Top simplices additionally carry a sign recording the
//! orientation of the manifold relative to that sorted order.

mod betti;
mod generate;
mod off;

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use betti::{betti_numbers, exact_rank, relative_betti_numbers};
pub use generate::{generate_annulus, generate_flat_torus, generate_punctured_torus};
pub use off::{load_off, write_off};

/// Signed sparse incidence matrix mapping p-cochains to (p+1)-cochains.
#[derive(Clone, Debug)]
pub struct Incidence {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, i8)>>,
}

impl Incidence {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[(usize, i8)] {
        &self.rows[i]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, s) in row {
                m[(i, j)] = s as f64;
            }
        }
        m
    }

    /// Integer product `self * rhs`, as sparse rows.
    pub fn compose(&self, rhs: &Incidence) -> Vec<Vec<(usize, i64)>> {
        assert_eq!(self.ncols, rhs.nrows);
        self.rows
            .iter()
            .map(|row| {
                let mut acc: HashMap<usize, i64> = HashMap::new();
                for &(k, a) in row {
                    for &(j, b) in &rhs.rows[k] {
                        *acc.entry(j).or_default() += a as i64 * b as i64;
                    }
                }
                let mut v: Vec<_> = acc.into_iter().filter(|&(_, x)| x != 0).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    /// Restriction to the given rows and columns.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Incidence {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let rows = rows
            .iter()
            .map(|&r| {
                self.rows[r]
                    .iter()
                    .filter(|&&(c, _)| col_map[c] != usize::MAX)
                    .map(|&(c, s)| (col_map[c], s))
                    .collect()
            })
            .collect::<Vec<Vec<_>>>();
        Incidence {
            nrows: rows.len(),
            ncols: cols.len(),
            rows,
        }
    }
}

/// Oriented simplicial complex of top dimension `dim`.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    dim: usize,
    simplices: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
    orientation: Vec<i8>,
    incidence: Vec<Incidence>,
    boundary_marker: Vec<Vec<bool>>,
    boundary: Option<Box<BoundaryComplex>>,
}

/// The boundary ∂M as a closed complex, with an index map into the parent.
#[derive(Clone, Debug)]
pub struct BoundaryComplex {
    pub complex: SimplicialComplex,
    /// `parent_index[p][i]` is the parent index of the boundary's i-th p-simplex.
    pub parent_index: Vec<Vec<usize>>,
}

fn sort_with_parity(v: &[usize]) -> (Vec<usize>, i8) {
    let mut s = v.to_vec();
    let mut sign = 1i8;
    for i in 0..s.len() {
        for j in 0..s.len() - 1 - i {
            if s[j] > s[j + 1] {
                s.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    (s, sign)
}

fn fmt_simplex(s: &[usize]) -> String {
    let parts: Vec<String> = s.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(","))
}

impl SimplicialComplex {
    /// Build and validate a complex from oriented top simplices (vertex order
    /// gives the orientation).
    pub fn from_top_simplices(dim: usize, tops: &[Vec<usize>]) -> Result<Self> {
        let mut sorted = Vec::with_capacity(tops.len());
        for t in tops {
            if t.len() != dim + 1 {
                return Err(Error::InvalidMesh(format!(
                    "simplex {} has {} vertices, expected {}",
                    fmt_simplex(t),
                    t.len(),
                    dim + 1
                )));
            }
            let (s, sign) = sort_with_parity(t);
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidMesh(format!(
                    "simplex {} repeats a vertex",
                    fmt_simplex(t)
                )));
            }
            sorted.push((s, sign));
        }
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidMesh(format!(
                    "simplex {} listed twice",
                    fmt_simplex(&w[0].0)
                )));
            }
        }
        let complex = Self::assemble(dim, sorted)?;
        complex.validate_manifold()?;
        let mut complex = complex;
        complex.boundary = complex.build_boundary()?;
        Ok(complex)
    }

    fn assemble(dim: usize, tops: Vec<(Vec<usize>, i8)>) -> Result<Self> {
        let mut sets: Vec<HashSet<Vec<usize>>> = vec![HashSet::new(); dim + 1];
        for (t, _) in &tops {
            for (p, set) in sets.iter_mut().enumerate() {
                for face in combinations(t, p + 1) {
                    set.insert(face);
                }
            }
        }
        let mut simplices: Vec<Vec<Vec<usize>>> = sets
            .into_iter()
            .map(|s| {
                let mut v: Vec<_> = s.into_iter().collect();
                v.sort();
                v
            })
            .collect();
        simplices[dim] = tops.iter().map(|(t, _)| t.clone()).collect();
        let orientation = tops.iter().map(|&(_, s)| s).collect();
        let lookup: Vec<HashMap<Vec<usize>, usize>> = simplices
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        let mut incidence = Vec::with_capacity(dim);
        for p in 0..dim {
            let rows = simplices[p + 1]
                .iter()
                .map(|sigma| {
                    let mut row: Vec<(usize, i8)> = (0..sigma.len())
                        .map(|i| {
                            let mut face = sigma.clone();
                            face.remove(i);
                            (lookup[p][&face], if i % 2 == 0 { 1 } else { -1 })
                        })
                        .collect();
                    row.sort_unstable();
                    row
                })
                .collect();
            incidence.push(Incidence {
                nrows: simplices[p + 1].len(),
                ncols: simplices[p].len(),
                rows,
            });
        }
        let mut complex = SimplicialComplex {
            dim,
            simplices,
            lookup,
            orientation,
            incidence,
            boundary_marker: Vec::new(),
            boundary: None,
        };
        complex.boundary_marker = complex.mark_boundary();
        Ok(complex)
    }

    fn cofaces_of_facets(&self) -> Vec<Vec<usize>> {
        let n = self.dim;
        let mut cof = vec![Vec::new(); self.count(n - 1)];
        for (t, row) in self.incidence[n - 1].rows.iter().enumerate() {
            for &(f, _) in row {
                cof[f].push(t);
            }
        }
        cof
    }

    fn mark_boundary(&self) -> Vec<Vec<bool>> {
        let n = self.dim;
        let mut marker: Vec<Vec<bool>> = (0..=n).map(|p| vec![false; self.count(p)]).collect();
        if n == 0 {
            return marker;
        }
        let cof = self.cofaces_of_facets();
        for (f, c) in cof.iter().enumerate() {
            if c.len() == 1 {
                for p in 0..n {
                    for face in combinations(&self.simplices[n - 1][f], p + 1) {
                        marker[p][self.lookup[p][&face]] = true;
                    }
                }
            }
        }
        marker
    }

    fn validate_manifold(&self) -> Result<()> {
        let n = self.dim;
        if n == 0 {
            return Ok(());
        }
        let cof = self.cofaces_of_facets();
        for (f, c) in cof.iter().enumerate() {
            if c.len() > 2 {
                return Err(Error::InvalidMesh(format!(
                    "non-manifold: facet {} bounds {} top simplices",
                    fmt_simplex(&self.simplices[n - 1][f]),
                    c.len()
                )));
            }
            if c.len() == 2 {
                let s0 = self.induced_sign(c[0], f);
                let s1 = self.induced_sign(c[1], f);
                if s0 == s1 {
                    return Err(Error::InvalidMesh(format!(
                        "inconsistent orientation across facet {}",
                        fmt_simplex(&self.simplices[n - 1][f])
                    )));
                }
            }
        }
        if n >= 2 {
            self.validate_vertex_links(&cof)?;
        }
        Ok(())
    }

    /// Orientation induced on facet `f` by top simplex `t`.
    fn induced_sign(&self, t: usize, f: usize) -> i8 {
        let n = self.dim;
        let coeff = self.incidence[n - 1].rows[t]
            .iter()
            .find(|&&(j, _)| j == f)
            .map(|&(_, s)| s)
            .expect("facet of top simplex");
        coeff * self.orientation[t]
    }

    fn validate_vertex_links(&self, cof: &[Vec<usize>]) -> Result<()> {
        let n = self.dim;
        let mut star: Vec<Vec<usize>> = vec![Vec::new(); self.count(0)];
        for (t, s) in self.simplices[n].iter().enumerate() {
            for v in s {
                star[self.lookup[0][&vec![*v]]].push(t);
            }
        }
        for (vi, tops) in star.iter().enumerate() {
            let v = self.simplices[0][vi][0];
            let local: HashMap<usize, usize> = tops.iter().enumerate().map(|(i, &t)| (t, i)).collect();
            let mut parent: Vec<usize> = (0..tops.len()).collect();
            fn find(p: &mut [usize], i: usize) -> usize {
                let mut r = i;
                while p[r] != r {
                    r = p[r];
                }
                p[i] = r;
                r
            }
            for &t in tops {
                for &(f, _) in &self.incidence[n - 1].rows[t] {
                    if !self.simplices[n - 1][f].contains(&v) {
                        continue;
                    }
                    for &u in &cof[f] {
                        if let Some(&j) = local.get(&u) {
                            let a = find(&mut parent, local[&t]);
                            let b = find(&mut parent, j);
                            parent[a] = b;
                        }
                    }
                }
            }
            let roots: HashSet<usize> = (0..tops.len()).map(|i| find(&mut parent, i)).collect();
            if roots.len() > 1 {
                return Err(Error::InvalidMesh(format!(
                    "non-manifold: vertex {v} has a disconnected link"
                )));
            }
        }
        Ok(())
    }

    fn build_boundary(&self) -> Result<Option<Box<BoundaryComplex>>> {
        let n = self.dim;
        if n == 0 {
            return Ok(None);
        }
        let cof = self.cofaces_of_facets();
        let facets: Vec<Vec<usize>> = cof
            .iter()
            .enumerate()
            .filter(|(_, c)| c.len() == 1)
            .map(|(f, c)| {
                let mut s = self.simplices[n - 1][f].clone();
                if self.induced_sign(c[0], f) < 0 && s.len() >= 2 {
                    s.swap(0, 1);
                }
                s
            })
            .collect();
        if facets.is_empty() {
            return Ok(None);
        }
        let mut sorted: Vec<(Vec<usize>, i8)> = facets.iter().map(|f| sort_with_parity(f)).collect();
        sorted.sort();
        let complex = Self::assemble(n - 1, sorted)?;
        if n >= 2 {
            let bcof = complex.cofaces_of_facets();
            for (f, c) in bcof.iter().enumerate() {
                if c.len() != 2 {
                    return Err(Error::InvalidMesh(format!(
                        "boundary is not closed at {}",
                        fmt_simplex(&complex.simplices[n - 2][f])
                    )));
                }
            }
            if n >= 3 {
                complex.validate_vertex_links(&bcof)?;
            }
        }
        let parent_index = (0..n)
            .map(|p| complex.simplices[p].iter().map(|s| self.lookup[p][s]).collect())
            .collect();
        Ok(Some(Box::new(BoundaryComplex { complex, parent_index })))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of p-simplices (zero outside `0..=dim`).
    pub fn count(&self, p: usize) -> usize {
        self.simplices.get(p).map_or(0, Vec::len)
    }

    pub fn simplices(&self, p: usize) -> &[Vec<usize>] {
        &self.simplices[p]
    }

    pub fn index_of(&self, simplex: &[usize]) -> Option<usize> {
        let p = simplex.len().checked_sub(1)?;
        self.lookup.get(p)?.get(simplex).copied()
    }

    /// Orientation signs of top simplices relative to sorted vertex order.
    pub fn orientation(&self) -> &[i8] {
        &self.orientation
    }

    /// Incidence matrix d_p from p-cochains to (p+1)-cochains.
    pub fn incidence(&self, p: usize) -> &Incidence {
        &self.incidence[p]
    }

    pub fn boundary_marker(&self, p: usize) -> &[bool] {
        &self.boundary_marker[p]
    }

    pub fn boundary(&self) -> Option<&BoundaryComplex> {
        self.boundary.as_deref()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_none()
    }

    /// Parent indices of boundary p-simplices, in boundary-complex order.
    pub fn boundary_indices(&self, p: usize) -> Vec<usize> {
        match &self.boundary {
            Some(b) if p < self.dim => b.parent_index[p].clone(),
            _ => Vec::new(),
        }
    }

    /// Indices of p-simplices not lying in ∂M.
    pub fn interior_indices(&self, p: usize) -> Vec<usize> {
        (0..self.count(p)).filter(|&i| !self.boundary_marker[p][i]).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim)
            .map(|p| if p % 2 == 0 { 1 } else { -1 } * self.count(p) as i64)
            .sum()
    }

    /// Connected components, counted through shared vertices.
    pub fn connected_components(&self) -> usize {
        let nv = self.count(0);
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        if self.dim >= 1 {
            for row in &self.incidence[0].rows {
                let a = find(&mut parent, row[0].0);
                let b = find(&mut parent, row[1].0);
                parent[a] = b;
            }
        }
        let roots: HashSet<usize> = (0..nv).map(|i| find(&mut parent, i)).collect();
        roots.len()
    }
}

fn combinations(s: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    let n = s.len();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| s[i]).collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 && idx[0] == n - k {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Piecewise-flat metric: embedded coordinates and/or edge-length overrides.
#[derive(Clone, Debug, Default)]
pub struct MeshGeometry {
    pub vertex_coords: Option<Vec<Vec<f64>>>,
    pub edge_lengths: HashMap<(usize, usize), f64>,
}

impl MeshGeometry {
    pub fn from_coords(coords: Vec<Vec<f64>>) -> Self {
        MeshGeometry {
            vertex_coords: Some(coords),
            edge_lengths: HashMap::new(),
        }
    }

    pub fn from_edge_lengths(edge_lengths: HashMap<(usize, usize), f64>) -> Self {
        MeshGeometry {
            vertex_coords: None,
            edge_lengths,
        }
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        let key = (a.min(b), a.max(b));
        if let Some(&l) = self.edge_lengths.get(&key) {
            return l;
        }
        let coords = self
            .vertex_coords
            .as_ref()
            .expect("edge length requires coordinates or an override");
        coords[a]
            .iter()
            .zip(&coords[b])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Gram matrix of edge vectors from the first vertex of `simplex`.
    pub fn edge_gram(&self, simplex: &[usize]) -> DMatrix<f64> {
        let k = simplex.len() - 1;
        let v0 = simplex[0];
        DMatrix::from_fn(k, k, |i, j| {
            let a = self.edge_length(v0, simplex[i + 1]);
            let b = self.edge_length(v0, simplex[j + 1]);
            if i == j {
                a * a
            } else {
                let c = self.edge_length(simplex[i + 1], simplex[j + 1]);
                0.5 * (a * a + b * b - c * c)
            }
        })
    }

    /// Unsigned k-volume of a simplex from its edge lengths.
    pub fn volume(&self, simplex: &[usize]) -> f64 {
        let k = simplex.len() - 1;
        if k == 0 {
            return 1.0;
        }
        let det = self.edge_gram(simplex).determinant();
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        det.max(0.0).sqrt() / fact
    }
}

/// A complex together with its metric.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub complex: SimplicialComplex,
    pub geometry: MeshGeometry,
}

impl Mesh {
    /// Validate edge lengths and simplex volumes, then wrap.
    pub fn new(complex: SimplicialComplex, geometry: MeshGeometry) -> Result<Self> {
        let n = complex.dim();
        if let Some(c) = &geometry.vertex_coords {
            if let Some(&v) = complex.simplices(0).iter().map(|s| &s[0]).find(|&&v| v >= c.len()) {
                return Err(Error::InvalidMesh(format!("vertex {v} has no coordinates")));
            }
        } else {
            for e in complex.simplices(1.min(n)) {
                if e.len() == 2 && !geometry.edge_lengths.contains_key(&(e[0], e[1])) {
                    return Err(Error::InvalidMesh(format!("edge {} has no length", fmt_simplex(e))));
                }
            }
        }
        for t in complex.simplices(n) {
            if n == 0 {
                break;
            }
            let gram = geometry.edge_gram(t);
            let scale = gram.diagonal().max();
            let det = gram.determinant();
            if det.is_nan() || det <= 1e-12 * scale.powi(n as i32) {
                return Err(Error::InvalidMesh(format!(
                    "simplex {} is degenerate or violates the triangle inequality",
                    fmt_simplex(t)
                )));
            }
        }
        Ok(Mesh { complex, geometry })
    }

    pub fn total_volume(&self) -> f64 {
        let n = self.complex.dim();
        self.complex.simplices(n).iter().map(|t| self.geometry.volume(t)).sum()
    }

    /// The boundary ∂M as a mesh with the inherited metric.
    pub fn boundary_mesh(&self) -> Option<Mesh> {
        self.complex.boundary().map(|b| Mesh {
            complex: b.complex.clone(),
            geometry: self.geometry.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerate_faces() {
        assert_eq!(combinations(&[1, 2, 3], 2), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(&[4], 1), vec![vec![4]]);
        assert_eq!(combinations(&[1, 2, 3], 3).len(), 1);
    }

    #[test]
    fn parity_of_sort() {
        assert_eq!(sort_with_parity(&[2, 1, 3]), (vec![1, 2, 3], -1));
        assert_eq!(sort_with_parity(&[3, 1, 2]), (vec![1, 2, 3], 1));
    }

    #[test]
    fn single_triangle() {
        let c = SimplicialComplex::from_top_simplices(2, &[vec![0, 1, 2]]).unwrap();
        assert_eq!((c.count(0), c.count(1), c.count(2)), (3, 3, 1));
        let b = c.boundary().unwrap();
        assert_eq!(b.complex.count(1), 3);
        assert!(b.complex.boundary().is_none());
    }

    #[test]
    fn inconsistent_orientation_rejected() {
        let err = SimplicialComplex::from_top_simplices(2, &[vec![0, 1, 2], vec![0, 1, 3]]).unwrap_err();
        assert!(err.to_string().contains("orientation"), "{err}");
    }

    #[test]
    fn pinched_vertex_rejected() {
        let err = SimplicialComplex::from_top_simplices(2, &[vec![0, 1, 2], vec![0, 3, 4]]).unwrap_err();
        assert!(err.to_string().contains("vertex 0"), "{err}");
    }

    #[test]
    fn three_triangles_on_an_edge_rejected() {
        let err = SimplicialComplex::from_top_simplices(2, &[vec![0, 1, 2], vec![1, 0, 3], vec![0, 1, 4]]).unwrap_err();
        assert!(err.to_string().contains("non-manifold"), "{err}");
    }
}
