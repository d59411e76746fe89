//! Discrete differential forms on a mesh and on its boundary.
//!
//! Cochains are coefficient vectors of Whitney forms. The L² pairing is the
//! Galerkin mass matrix, the codifferential is the mass adjoint of d against
//! forms that vanish on ∂M, and the normal trace is the boundary functional
//! that turns Green's formula into an identity.

mod whitney;

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{select_rows, selector, submatrix};
use crate::mesh::Mesh;

pub use whitney::{assemble_mass, wedge_load};

const MODULE: &str = "forms";

/// Where a cochain lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Interior,
    Boundary,
}

impl Carrier {
    pub fn as_str(self) -> &'static str {
        match self {
            Carrier::Interior => "interior",
            Carrier::Boundary => "boundary",
        }
    }
}

/// Real values on the oriented p-simplices of M or of ∂M.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub carrier: Carrier,
    pub values: DVector<f64>,
}

impl Cochain {
    pub fn new(degree: usize, carrier: Carrier, values: DVector<f64>) -> Self {
        Cochain {
            degree,
            carrier,
            values,
        }
    }

    /// Write as CSV: a `degree,carrier` block, then `simplex_index,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::solver(MODULE, format!("csv write: {e}"));
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["degree", "carrier"]).map_err(io)?;
        w.write_record([self.degree.to_string(), self.carrier.as_str().to_string()])
            .map_err(io)?;
        w.write_record(["simplex_index", "value"]).map_err(io)?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([i.to_string(), format!("{v:e}")]).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::solver(MODULE, format!("csv write: {e}")))?;
        Ok(())
    }

    /// Parse the format produced by [`Cochain::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let bad = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let records: Vec<csv::StringRecord> = r
            .records()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(0, &e.to_string()))?;
        let is = |r: &csv::StringRecord, a: &str, b: &str| r.len() == 2 && &r[0] == a && &r[1] == b;
        if records.len() < 3 || !is(&records[0], "degree", "carrier") || !is(&records[2], "simplex_index", "value") {
            return Err(bad(1, "expected `degree,carrier` and `simplex_index,value` headers"));
        }
        let degree = records[1][0].parse().map_err(|_| bad(2, "bad degree"))?;
        let carrier = match &records[1][1] {
            "interior" => Carrier::Interior,
            "boundary" => Carrier::Boundary,
            _ => return Err(bad(2, "carrier must be `interior` or `boundary`")),
        };
        let mut values = Vec::with_capacity(records.len() - 3);
        for (k, rec) in records[3..].iter().enumerate() {
            let line = k + 4;
            let idx: usize = rec[0].parse().map_err(|_| bad(line, "bad simplex index"))?;
            if idx != k {
                return Err(bad(line, "simplex indices must be consecutive from 0"));
            }
            values.push(rec[1].parse().map_err(|_| bad(line, "bad value"))?);
        }
        Ok(Cochain::new(degree, carrier, DVector::from_vec(values)))
    }
}

/// Per-degree mass matrices on M and on ∂M.
#[derive(Clone, Debug)]
pub struct InnerProductStructure {
    pub mass: Vec<DMatrix<f64>>,
    pub boundary_mass: Vec<DMatrix<f64>>,
}

/// Tangential restriction and weak normal trace.
///
/// `tangential[p]` maps p-cochains on M to p-cochains on ∂M. `normal[p]` maps
/// p-cochains on M to functionals on boundary (p−1)-cochains.
#[derive(Clone, Debug)]
pub struct TraceOperators {
    pub tangential: Vec<DMatrix<f64>>,
    pub normal: Vec<DMatrix<f64>>,
}

/// All discrete operators of a mesh, assembled once.
#[derive(Clone, Debug)]
pub struct FormSpace {
    mesh: Mesh,
    d: Vec<DMatrix<f64>>,
    d_boundary: Vec<DMatrix<f64>>,
    ips: InnerProductStructure,
    traces: TraceOperators,
    interior: Vec<Vec<usize>>,
    boundary: Vec<Vec<usize>>,
    mass_inv: Vec<DMatrix<f64>>,
    boundary_mass_inv: Vec<DMatrix<f64>>,
    interior_mass_inv: Vec<DMatrix<f64>>,
    tolerance: f64,
}

fn spd_inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let scale = m.amax();
    let asym = (m - m.transpose()).amax();
    if asym > 1e-14 * scale {
        return Err(Error::solver(MODULE, format!("{what} is not symmetric ({asym:e})")));
    }
    crate::linalg::spd_inverse(m).ok_or_else(|| Error::solver(MODULE, format!("{what} is not positive definite")))
}

impl FormSpace {
    pub const DEFAULT_TOLERANCE: f64 = 1e-12;

    pub fn new(mesh: &Mesh) -> Result<Self> {
        Self::with_tolerance(mesh, Self::DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(mesh: &Mesh, tolerance: f64) -> Result<Self> {
        let c = &mesh.complex;
        let n = c.dim();
        let d = (0..n).map(|p| c.incidence(p).to_dense()).collect();
        let mass: Vec<_> = (0..=n).map(|p| assemble_mass(c, &mesh.geometry, p)).collect();
        let (d_boundary, boundary_mass): (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) = match c.boundary() {
            Some(b) => (
                (0..n - 1).map(|p| b.complex.incidence(p).to_dense()).collect(),
                (0..n).map(|p| assemble_mass(&b.complex, &mesh.geometry, p)).collect(),
            ),
            None => (Vec::new(), (0..n).map(|_| DMatrix::zeros(0, 0)).collect()),
        };
        let interior: Vec<Vec<usize>> = (0..=n).map(|p| c.interior_indices(p)).collect();
        let boundary: Vec<Vec<usize>> = (0..=n).map(|p| c.boundary_indices(p)).collect();
        let mass_inv = mass
            .iter()
            .enumerate()
            .map(|(p, m)| spd_inverse(m, &format!("mass matrix of degree {p}")))
            .collect::<Result<Vec<_>>>()?;
        let boundary_mass_inv = boundary_mass
            .iter()
            .enumerate()
            .map(|(p, m)| spd_inverse(m, &format!("boundary mass matrix of degree {p}")))
            .collect::<Result<Vec<_>>>()?;
        let interior_mass_inv = (0..=n)
            .map(|p| spd_inverse(&submatrix(&mass[p], &interior[p], &interior[p]), "interior mass block"))
            .collect::<Result<Vec<_>>>()?;
        let tangential: Vec<_> = (0..=n).map(|p| selector(&boundary[p], c.count(p))).collect();
        let mut space = FormSpace {
            mesh: mesh.clone(),
            d,
            d_boundary,
            ips: InnerProductStructure { mass, boundary_mass },
            traces: TraceOperators {
                tangential,
                normal: Vec::new(),
            },
            interior,
            boundary,
            mass_inv,
            boundary_mass_inv,
            interior_mass_inv,
            tolerance,
        };
        space.traces.normal = (0..=n).map(|p| space.normal_matrix(p)).collect();
        Ok(space)
    }

    fn normal_matrix(&self, p: usize) -> DMatrix<f64> {
        if p == 0 {
            return DMatrix::zeros(0, self.count(0));
        }
        let q = p - 1;
        let m = &self.ips.mass[q];
        let (b, i) = (&self.boundary[q], &self.interior[q]);
        let lift = submatrix(m, b, i) * &self.interior_mass_inv[q];
        let s = self.d[q].transpose() * &self.ips.mass[p];
        select_rows(&s, b) - lift * select_rows(&s, i)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.complex.dim()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn has_boundary(&self) -> bool {
        !self.mesh.complex.is_closed()
    }

    /// Number of p-simplices of the given carrier.
    pub fn count(&self, p: usize) -> usize {
        self.mesh.complex.count(p)
    }

    pub fn boundary_count(&self, p: usize) -> usize {
        self.boundary.get(p).map_or(0, Vec::len)
    }

    fn carrier_count(&self, p: usize, carrier: Carrier) -> usize {
        match carrier {
            Carrier::Interior => self.count(p),
            Carrier::Boundary => self.boundary_count(p),
        }
    }

    fn carrier_dim(&self, carrier: Carrier) -> usize {
        match carrier {
            Carrier::Interior => self.dim(),
            Carrier::Boundary => self.dim().saturating_sub(1),
        }
    }

    pub fn interior_indices(&self, p: usize) -> &[usize] {
        &self.interior[p]
    }

    pub fn boundary_indices(&self, p: usize) -> &[usize] {
        &self.boundary[p]
    }

    pub fn inner_products(&self) -> &InnerProductStructure {
        &self.ips
    }

    pub fn traces(&self) -> &TraceOperators {
        &self.traces
    }

    pub fn mass(&self, p: usize) -> &DMatrix<f64> {
        &self.ips.mass[p]
    }

    pub fn mass_inv(&self, p: usize) -> &DMatrix<f64> {
        &self.mass_inv[p]
    }

    pub fn boundary_mass(&self, p: usize) -> &DMatrix<f64> {
        &self.ips.boundary_mass[p]
    }

    pub fn boundary_mass_inv(&self, p: usize) -> &DMatrix<f64> {
        &self.boundary_mass_inv[p]
    }

    /// Inverse of the interior-interior block of the degree-p mass matrix.
    pub fn interior_mass_inv(&self, p: usize) -> &DMatrix<f64> {
        &self.interior_mass_inv[p]
    }

    /// d_p on M as a dense matrix; the zero map out of the top degree.
    pub fn d_matrix(&self, p: usize) -> DMatrix<f64> {
        match self.d.get(p) {
            Some(m) => m.clone(),
            None => DMatrix::zeros(0, self.count(p)),
        }
    }

    /// d_p on ∂M; the zero map out of the top boundary degree.
    pub fn boundary_d_matrix(&self, p: usize) -> DMatrix<f64> {
        match self.d_boundary.get(p) {
            Some(m) if m.ncols() == self.boundary_count(p) => m.clone(),
            _ => DMatrix::zeros(self.boundary_count(p + 1), self.boundary_count(p)),
        }
    }

    pub fn tangential(&self, p: usize) -> &DMatrix<f64> {
        &self.traces.tangential[p]
    }

    pub fn normal(&self, p: usize) -> &DMatrix<f64> {
        &self.traces.normal[p]
    }

    /// Rows of d_{p−1}ᵀ M_p on interior (p−1)-simplices: the weak δω = 0 constraint.
    pub fn coclosed_constraint(&self, p: usize) -> DMatrix<f64> {
        if p == 0 {
            return DMatrix::zeros(0, self.count(0));
        }
        let s = self.d[p - 1].transpose() * &self.ips.mass[p];
        select_rows(&s, &self.interior[p - 1])
    }

    /// Full d_{p−1}ᵀ M_p, whose kernel is δω = 0 together with i*⋆ω = 0.
    pub fn coclosed_neumann_constraint(&self, p: usize) -> DMatrix<f64> {
        if p == 0 {
            return DMatrix::zeros(0, self.count(0));
        }
        self.d[p - 1].transpose() * &self.ips.mass[p]
    }

    /// δ_p as a matrix from p-cochains to (p−1)-cochains.
    pub fn delta_matrix(&self, p: usize) -> DMatrix<f64> {
        if p == 0 {
            return DMatrix::zeros(0, self.count(0));
        }
        let inner = &self.interior_mass_inv[p - 1] * self.coclosed_constraint(p);
        selector(&self.interior[p - 1], self.count(p - 1)).transpose() * inner
    }

    fn delta_boundary_matrix(&self, p: usize) -> DMatrix<f64> {
        let dm = self.boundary_d_matrix(p - 1);
        &self.boundary_mass_inv[p - 1] * dm.transpose() * &self.ips.boundary_mass[p]
    }

    fn check(&self, w: &Cochain) -> Result<()> {
        let top = self.carrier_dim(w.carrier);
        if w.degree > top {
            return Err(Error::degree(
                MODULE,
                format!("degree {} exceeds dimension {top}", w.degree),
            ));
        }
        let want = self.carrier_count(w.degree, w.carrier);
        if w.values.len() != want {
            return Err(Error::degree(
                MODULE,
                format!("{}-cochain has {} values, expected {want}", w.degree, w.values.len()),
            ));
        }
        Ok(())
    }

    pub fn zeros(&self, degree: usize, carrier: Carrier) -> Cochain {
        Cochain::new(degree, carrier, DVector::zeros(self.carrier_count(degree, carrier)))
    }

    /// Exterior derivative.
    pub fn d(&self, w: &Cochain) -> Result<Cochain> {
        self.check(w)?;
        if w.degree >= self.carrier_dim(w.carrier) {
            return Err(Error::degree(MODULE, format!("no forms of degree {}", w.degree + 1)));
        }
        let m = match w.carrier {
            Carrier::Interior => self.d_matrix(w.degree),
            Carrier::Boundary => self.boundary_d_matrix(w.degree),
        };
        Ok(Cochain::new(w.degree + 1, w.carrier, m * &w.values))
    }

    /// Codifferential, the mass adjoint of d on forms vanishing on ∂M.
    pub fn delta(&self, w: &Cochain) -> Result<Cochain> {
        self.check(w)?;
        if w.degree == 0 {
            return Err(Error::degree(MODULE, "codifferential of a 0-form has degree −1"));
        }
        let m = match w.carrier {
            Carrier::Interior => self.delta_matrix(w.degree),
            Carrier::Boundary => self.delta_boundary_matrix(w.degree),
        };
        Ok(Cochain::new(w.degree - 1, w.carrier, m * &w.values))
    }

    /// L² inner product ⟨α, β⟩.
    pub fn inner_product(&self, a: &Cochain, b: &Cochain) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        if a.degree != b.degree || a.carrier != b.carrier {
            return Err(Error::degree(MODULE, "inner product of mismatched cochains"));
        }
        let m = match a.carrier {
            Carrier::Interior => &self.ips.mass[a.degree],
            Carrier::Boundary => &self.ips.boundary_mass[a.degree],
        };
        Ok(a.values.dot(&(m * &b.values)))
    }

    pub fn norm(&self, w: &Cochain) -> Result<f64> {
        Ok(self.inner_product(w, w)?.max(0.0).sqrt())
    }

    /// Pullback i*ω to ∂M.
    pub fn tangential_trace(&self, w: &Cochain) -> Result<Cochain> {
        self.check(w)?;
        if w.carrier != Carrier::Interior {
            return Err(Error::degree(MODULE, "trace of a boundary cochain"));
        }
        Ok(Cochain::new(
            w.degree,
            Carrier::Boundary,
            &self.traces.tangential[w.degree] * &w.values,
        ))
    }

    /// Weak normal trace i*⋆ω of a p-form, as a functional on boundary (p−1)-cochains.
    pub fn normal_trace(&self, w: &Cochain) -> Result<Cochain> {
        self.check(w)?;
        if w.carrier != Carrier::Interior || w.degree == 0 {
            return Err(Error::degree(
                MODULE,
                "normal trace needs an interior form of degree ≥ 1",
            ));
        }
        Ok(Cochain::new(
            w.degree - 1,
            Carrier::Boundary,
            &self.traces.normal[w.degree] * &w.values,
        ))
    }

    /// ⟨dα, β⟩ − ⟨α, δβ⟩ − ∮ i*α ∧ i*⋆β.
    pub fn greens_residual(&self, a: &Cochain, b: &Cochain) -> Result<f64> {
        if a.degree + 1 != b.degree {
            return Err(Error::degree(MODULE, "Green's formula needs degrees p−1 and p"));
        }
        let lhs = self.inner_product(&self.d(a)?, b)?;
        let rhs = self.inner_product(a, &self.delta(b)?)?;
        let boundary = self.tangential_trace(a)?.values.dot(&self.normal_trace(b)?.values);
        Ok(lhs - rhs - boundary)
    }

    /// L² projection of the Whitney wedge product onto cochains of degree p+q.
    pub fn wedge(&self, a: &Cochain, b: &Cochain) -> Result<Cochain> {
        self.check(a)?;
        self.check(b)?;
        if a.carrier != b.carrier {
            return Err(Error::degree(MODULE, "wedge of cochains on different carriers"));
        }
        let r = a.degree + b.degree;
        if r > self.carrier_dim(a.carrier) {
            return Err(Error::degree(
                MODULE,
                format!("wedge has degree {r} above the dimension"),
            ));
        }
        let values = match a.carrier {
            Carrier::Interior => {
                let load = wedge_load(
                    &self.mesh.complex,
                    &self.mesh.geometry,
                    a.degree,
                    b.degree,
                    &a.values,
                    &b.values,
                );
                &self.mass_inv[r] * load
            }
            Carrier::Boundary => {
                let bc = &self
                    .mesh
                    .complex
                    .boundary()
                    .expect("boundary cochain implies ∂M")
                    .complex;
                let load = wedge_load(bc, &self.mesh.geometry, a.degree, b.degree, &a.values, &b.values);
                &self.boundary_mass_inv[r] * load
            }
        };
        Ok(Cochain::new(r, a.carrier, values))
    }
}
