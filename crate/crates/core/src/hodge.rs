//! Hodge–Morrey–Friedrichs decomposition and Poincaré duality angles.
//!
//! Every subspace is the null space or range of an assembled operator,
//! returned with a mass-orthonormal basis. The interior/boundary splits use
//! the orthogonality criterion (boundary N-fields are orthogonal to all
//! Dirichlet fields) and are cross-checked by the trace criterion.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{Carrier, Cochain, FormSpace};
use crate::linalg::{
    column_space, hstack, m_orthonormalize, null_space, null_space_relative_to, orthonormality_defect,
    principal_cosines, selector, spectral_norm, subspace_distance, symmetric_eigen,
};

const MODULE: &str = "hodge";

/// Largest tolerated deviation of `Xᵀ M X` from the identity.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Condition number above which the sum H_N + H_D is rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Role {
    HarmonicNeumann,
    HarmonicDirichlet,
    Harmonic,
    ExactDirichlet,
    CoexactNeumann,
    BoundaryN,
    InteriorN,
    BoundaryD,
    InteriorD,
    ExactCoexact,
}

/// Mass-orthonormal basis of a subspace of p-cochains.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    pub degree: usize,
    pub carrier: Carrier,
    pub columns: DMatrix<f64>,
    pub role: Role,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn column(&self, j: usize) -> Cochain {
        Cochain::new(self.degree, self.carrier, self.columns.column(j).into_owned())
    }

    /// Orthogonal projection of a coefficient vector.
    pub fn project(&self, m: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
        crate::linalg::project(&self.columns, m, v)
    }
}

/// Principal angles between two subspaces.
#[derive(Clone, Debug)]
pub struct PrincipalAngleSet {
    pub degree: usize,
    pub cosines: Vec<f64>,
    pub left_vectors: DMatrix<f64>,
    pub right_vectors: DMatrix<f64>,
}

impl PrincipalAngleSet {
    pub fn angles(&self) -> Vec<f64> {
        self.cosines.iter().map(|c| c.acos()).collect()
    }
}

fn basis(fs: &FormSpace, p: usize, raw: DMatrix<f64>, role: Role) -> SubspaceBasis {
    SubspaceBasis {
        degree: p,
        carrier: Carrier::Interior,
        columns: m_orthonormalize(&raw, fs.mass(p)),
        role,
    }
}

fn check_degree(fs: &FormSpace, p: usize) -> Result<()> {
    if p > fs.dim() {
        return Err(Error::degree(
            MODULE,
            format!("degree {p} exceeds dimension {}", fs.dim()),
        ));
    }
    Ok(())
}

/// H^p_N: dω = 0, δω = 0, i*⋆ω = 0.
pub fn harmonic_neumann_fields(fs: &FormSpace, p: usize) -> Result<SubspaceBasis> {
    check_degree(fs, p)?;
    let d = fs.d_matrix(p);
    let co = fs.coclosed_neumann_constraint(p);
    let z = null_space(&[&d, &co], fs.count(p), MODULE)?;
    Ok(basis(fs, p, z, Role::HarmonicNeumann))
}

/// H^p_D: dω = 0, δω = 0, i*ω = 0.
pub fn harmonic_dirichlet_fields(fs: &FormSpace, p: usize) -> Result<SubspaceBasis> {
    check_degree(fs, p)?;
    let d = fs.d_matrix(p);
    let co = fs.coclosed_constraint(p);
    let z = null_space(&[&d, &co, fs.tangential(p)], fs.count(p), MODULE)?;
    Ok(basis(fs, p, z, Role::HarmonicDirichlet))
}

/// H^p: all harmonic fields, dω = 0 and δω = 0 with no boundary condition.
pub fn harmonic_fields(fs: &FormSpace, p: usize) -> Result<SubspaceBasis> {
    check_degree(fs, p)?;
    let d = fs.d_matrix(p);
    let co = fs.coclosed_constraint(p);
    let z = null_space(&[&d, &co], fs.count(p), MODULE)?;
    Ok(basis(fs, p, z, Role::Harmonic))
}

/// E^p_D: differentials of (p−1)-forms vanishing on ∂M.
pub fn exact_dirichlet(fs: &FormSpace, p: usize) -> Result<SubspaceBasis> {
    check_degree(fs, p)?;
    if p == 0 {
        return Ok(basis(fs, 0, DMatrix::zeros(fs.count(0), 0), Role::ExactDirichlet));
    }
    let ext = selector(fs.interior_indices(p - 1), fs.count(p - 1)).transpose();
    let range = column_space(&(fs.d_matrix(p - 1) * ext), MODULE)?;
    Ok(basis(fs, p, range, Role::ExactDirichlet))
}

/// cE^p_N: codifferentials of (p+1)-forms with vanishing normal trace.
pub fn coexact_neumann(fs: &FormSpace, p: usize) -> Result<SubspaceBasis> {
    check_degree(fs, p)?;
    let gen = fs.mass_inv(p) * fs.d_matrix(p).transpose();
    let range = column_space(&gen, MODULE)?;
    Ok(basis(fs, p, range, Role::CoexactNeumann))
}

/// Coefficients spanning the orthogonal complement of `null` in R^k.
fn complement(null: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    if null.ncols() == 0 {
        return Ok(DMatrix::identity(k, k));
    }
    null_space(&[&null.transpose()], k, MODULE)
}

/// DeTurck–Gluck split of H^p_N into boundary and interior parts.
pub fn interior_boundary_split_n(
    fs: &FormSpace,
    hn: &SubspaceBasis,
    hd: &SubspaceBasis,
) -> Result<(SubspaceBasis, SubspaceBasis)> {
    split(fs, hn, hd, Role::BoundaryN, Role::InteriorN)
}

/// DeTurck–Gluck split of H^p_D into boundary and interior parts.
pub fn interior_boundary_split_d(
    fs: &FormSpace,
    hn: &SubspaceBasis,
    hd: &SubspaceBasis,
) -> Result<(SubspaceBasis, SubspaceBasis)> {
    split(fs, hd, hn, Role::BoundaryD, Role::InteriorD)
}

fn split(
    fs: &FormSpace,
    own: &SubspaceBasis,
    other: &SubspaceBasis,
    boundary_role: Role,
    interior_role: Role,
) -> Result<(SubspaceBasis, SubspaceBasis)> {
    let p = own.degree;
    let k = own.dim();
    let make = |cols: DMatrix<f64>, role| SubspaceBasis {
        degree: p,
        carrier: Carrier::Interior,
        columns: m_orthonormalize(&cols, fs.mass(p)),
        role,
    };
    if !fs.has_boundary() {
        return Ok((
            make(DMatrix::zeros(own.columns.nrows(), 0), boundary_role),
            make(own.columns.clone(), interior_role),
        ));
    }
    let cross = other.columns.transpose() * fs.mass(p) * &own.columns;
    let null = null_space_relative_to(&cross, 1.0, MODULE)?;
    let comp = complement(&null, k)?;
    Ok((
        make(&own.columns * null, boundary_role),
        make(&own.columns * comp, interior_role),
    ))
}

/// Interior N-fields by the trace criterion: fields whose pullback is exact on ∂M.
pub fn interior_n_by_trace(fs: &FormSpace, hn: &SubspaceBasis) -> Result<SubspaceBasis> {
    let p = hn.degree;
    if !fs.has_boundary() {
        return Ok(hn.clone());
    }
    let traces = fs.tangential(p) * &hn.columns;
    let exact = if p == 0 {
        DMatrix::zeros(fs.boundary_count(0), 0)
    } else {
        column_space(&fs.boundary_d_matrix(p - 1), MODULE)?
    };
    let residual = &traces - &exact * (exact.transpose() * &traces);
    let z = null_space_relative_to(&residual, spectral_norm(&traces), MODULE)?;
    Ok(basis(fs, p, &hn.columns * z, Role::InteriorN))
}

/// Interior D-fields by the trace criterion: fields whose normal trace is exact on ∂M.
pub fn interior_d_by_trace(fs: &FormSpace, hd: &SubspaceBasis) -> Result<SubspaceBasis> {
    let p = hd.degree;
    if !fs.has_boundary() || p == 0 {
        return Ok(hd.clone());
    }
    let traces = fs.normal(p) * &hd.columns;
    let closed = null_space(&[&fs.boundary_d_matrix(p - 1)], fs.boundary_count(p - 1), MODULE)?;
    let pairing = closed.transpose() * &traces;
    let z = null_space_relative_to(&pairing, spectral_norm(&traces), MODULE)?;
    Ok(basis(fs, p, &hd.columns * z, Role::InteriorD))
}

/// Principal angles between two mass-orthonormal subspaces.
pub fn principal_angles(fs: &FormSpace, a: &SubspaceBasis, b: &SubspaceBasis) -> Result<PrincipalAngleSet> {
    if a.degree != b.degree || a.carrier != b.carrier {
        return Err(Error::degree(MODULE, "principal angles between different spaces"));
    }
    let m = match a.carrier {
        Carrier::Interior => fs.mass(a.degree),
        Carrier::Boundary => fs.boundary_mass(a.degree),
    };
    for x in [a, b] {
        let deviation = orthonormality_defect(&x.columns, m);
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NonOrthonormal { deviation });
        }
    }
    let (cosines, left_vectors, right_vectors) = principal_cosines(&a.columns, &b.columns, m);
    Ok(PrincipalAngleSet {
        degree: a.degree,
        cosines,
        left_vectors,
        right_vectors,
    })
}

/// Components of the Morrey decomposition Ω^p = cE^p_N ⊕ H^p ⊕ E^p_D.
#[derive(Clone, Debug)]
pub struct Morrey {
    pub coexact_n: Cochain,
    pub harmonic: Cochain,
    pub exact_d: Cochain,
}

/// Components of the five-term decomposition.
#[derive(Clone, Debug)]
pub struct FiveTerm {
    pub coexact_n: Cochain,
    pub exact_coexact: Cochain,
    pub h_n: Cochain,
    pub h_d: Cochain,
    pub exact_d: Cochain,
}

impl FiveTerm {
    pub fn parts(&self) -> [&Cochain; 5] {
        [
            &self.coexact_n,
            &self.exact_coexact,
            &self.h_n,
            &self.h_d,
            &self.exact_d,
        ]
    }
}

/// Dimensions of the nine subspaces in one degree.
#[derive(Clone, Debug, Serialize)]
pub struct Dimensions {
    pub harmonic_neumann: usize,
    pub harmonic_dirichlet: usize,
    pub exact_dirichlet: usize,
    pub coexact_neumann: usize,
    pub boundary_n: usize,
    pub interior_n: usize,
    pub boundary_d: usize,
    pub interior_d: usize,
    pub exact_coexact: usize,
}

/// Largest cross inner products between subspaces that must be orthogonal.
#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityResiduals {
    pub coexact_vs_harmonic: f64,
    pub harmonic_vs_exact: f64,
    pub coexact_vs_exact: f64,
    pub boundary_n_vs_dirichlet: f64,
    pub boundary_d_vs_neumann: f64,
    pub boundary_n_vs_interior_n: f64,
    pub boundary_d_vs_interior_d: f64,
    pub exact_coexact_vs_neumann: f64,
    pub exact_coexact_vs_dirichlet: f64,
}

impl OrthogonalityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.coexact_vs_harmonic,
            self.harmonic_vs_exact,
            self.coexact_vs_exact,
            self.boundary_n_vs_dirichlet,
            self.boundary_d_vs_neumann,
            self.boundary_n_vs_interior_n,
            self.boundary_d_vs_interior_d,
            self.exact_coexact_vs_neumann,
            self.exact_coexact_vs_dirichlet,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// JSON-serializable per-degree summary.
#[derive(Clone, Debug, Serialize)]
pub struct HodgeReport {
    pub degree: usize,
    pub dimensions: Dimensions,
    pub cosines: Vec<f64>,
    pub orthogonality: OrthogonalityResiduals,
    pub trace_criterion_distance_n: f64,
    pub trace_criterion_distance_d: f64,
}

/// All subspaces of the decomposition in a fixed degree.
#[derive(Clone, Debug)]
pub struct HodgeDegree<'a> {
    fs: &'a FormSpace,
    pub degree: usize,
    pub harmonic_neumann: SubspaceBasis,
    pub harmonic_dirichlet: SubspaceBasis,
    pub harmonic: SubspaceBasis,
    pub exact_dirichlet: SubspaceBasis,
    pub coexact_neumann: SubspaceBasis,
    pub boundary_n: SubspaceBasis,
    pub interior_n: SubspaceBasis,
    pub boundary_d: SubspaceBasis,
    pub interior_d: SubspaceBasis,
    pub exact_coexact: SubspaceBasis,
}

impl<'a> HodgeDegree<'a> {
    pub fn new(fs: &'a FormSpace, p: usize) -> Result<Self> {
        let hn = harmonic_neumann_fields(fs, p)?;
        let hd = harmonic_dirichlet_fields(fs, p)?;
        let h = if fs.has_boundary() {
            harmonic_fields(fs, p)?
        } else {
            SubspaceBasis {
                role: Role::Harmonic,
                ..hn.clone()
            }
        };
        let (boundary_n, interior_n) = interior_boundary_split_n(fs, &hn, &hd)?;
        let (boundary_d, interior_d) = interior_boundary_split_d(fs, &hn, &hd)?;
        let exact_coexact = if fs.has_boundary() {
            let both = hstack(&hn.columns, &hd.columns);
            let cross = both.transpose() * fs.mass(p) * &h.columns;
            let z = null_space_relative_to(&cross, 1.0, MODULE)?;
            basis(fs, p, &h.columns * z, Role::ExactCoexact)
        } else {
            basis(fs, p, DMatrix::zeros(fs.count(p), 0), Role::ExactCoexact)
        };
        Ok(HodgeDegree {
            fs,
            degree: p,
            exact_dirichlet: exact_dirichlet(fs, p)?,
            coexact_neumann: coexact_neumann(fs, p)?,
            harmonic_neumann: hn,
            harmonic_dirichlet: hd,
            harmonic: h,
            boundary_n,
            interior_n,
            boundary_d,
            interior_d,
            exact_coexact,
        })
    }

    fn mass(&self) -> &DMatrix<f64> {
        self.fs.mass(self.degree)
    }

    fn check(&self, w: &Cochain) -> Result<()> {
        if w.degree != self.degree || w.carrier != Carrier::Interior || w.values.len() != self.fs.count(self.degree) {
            return Err(Error::degree(
                MODULE,
                format!("expected an interior {}-cochain", self.degree),
            ));
        }
        Ok(())
    }

    fn cochain(&self, v: DVector<f64>) -> Cochain {
        Cochain::new(self.degree, Carrier::Interior, v)
    }

    /// ω = coexact_N + harmonic + exact_D, mutually orthogonal.
    pub fn morrey_decompose(&self, w: &Cochain) -> Result<Morrey> {
        self.check(w)?;
        let m = self.mass();
        let e = self.exact_dirichlet.project(m, &w.values);
        let c = self.coexact_neumann.project(m, &w.values);
        let h = &w.values - &e - &c;
        Ok(Morrey {
            coexact_n: self.cochain(c),
            harmonic: self.cochain(h),
            exact_d: self.cochain(e),
        })
    }

    /// ω = cE_N + EcE + h_N + h_D + E_D.
    ///
    /// On a closed mesh H_N = H_D = H and the whole harmonic part is reported
    /// as `h_n`.
    pub fn five_term_decompose(&self, w: &Cochain) -> Result<FiveTerm> {
        let morrey = self.morrey_decompose(w)?;
        let m = self.mass();
        let h = &morrey.harmonic.values;
        let ece = self.exact_coexact.project(m, h);
        let rest = h - &ece;
        let (hn_part, hd_part) = if !self.fs.has_boundary() {
            (rest, DVector::zeros(h.len()))
        } else {
            let a = hstack(&self.harmonic_neumann.columns, &self.harmonic_dirichlet.columns);
            let g = a.transpose() * m * &a;
            if g.nrows() > 0 {
                let (values, _) = symmetric_eigen(&g);
                let (min, max) = (values[0], values[values.len() - 1]);
                let condition = if min > 0.0 { max / min } else { f64::INFINITY };
                if condition > MAX_CONDITION {
                    return Err(Error::IllConditioned { condition });
                }
            }
            let rhs = a.transpose() * m * &rest;
            let coeff = g
                .cholesky()
                .map(|c| c.solve(&rhs))
                .unwrap_or_else(|| DVector::zeros(rhs.len()));
            let k = self.harmonic_neumann.dim();
            let cn = coeff.rows(0, k).into_owned();
            let cd = coeff.rows(k, coeff.len() - k).into_owned();
            (
                &self.harmonic_neumann.columns * cn,
                &self.harmonic_dirichlet.columns * cd,
            )
        };
        Ok(FiveTerm {
            coexact_n: morrey.coexact_n,
            exact_coexact: self.cochain(ece),
            h_n: self.cochain(hn_part),
            h_d: self.cochain(hd_part),
            exact_d: morrey.exact_d,
        })
    }

    /// Orthogonal projection onto H^p_D.
    pub fn project_dirichlet(&self, w: &DVector<f64>) -> DVector<f64> {
        self.harmonic_dirichlet.project(self.mass(), w)
    }

    /// Orthogonal projection onto H^p_N.
    pub fn project_neumann(&self, w: &DVector<f64>) -> DVector<f64> {
        self.harmonic_neumann.project(self.mass(), w)
    }

    /// Principal angles between the interior subspaces.
    pub fn poincare_duality_angles(&self) -> Result<PrincipalAngleSet> {
        principal_angles(self.fs, &self.interior_n, &self.interior_d)
    }

    pub fn dimensions(&self) -> Dimensions {
        Dimensions {
            harmonic_neumann: self.harmonic_neumann.dim(),
            harmonic_dirichlet: self.harmonic_dirichlet.dim(),
            exact_dirichlet: self.exact_dirichlet.dim(),
            coexact_neumann: self.coexact_neumann.dim(),
            boundary_n: self.boundary_n.dim(),
            interior_n: self.interior_n.dim(),
            boundary_d: self.boundary_d.dim(),
            interior_d: self.interior_d.dim(),
            exact_coexact: self.exact_coexact.dim(),
        }
    }

    fn cross(&self, a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
        if a.dim() == 0 || b.dim() == 0 {
            return 0.0;
        }
        (a.columns.transpose() * self.mass() * &b.columns).amax()
    }

    pub fn orthogonality_residuals(&self) -> OrthogonalityResiduals {
        let closed = !self.fs.has_boundary();
        let guard = |x: f64| if closed { 0.0 } else { x };
        OrthogonalityResiduals {
            coexact_vs_harmonic: self.cross(&self.coexact_neumann, &self.harmonic),
            harmonic_vs_exact: self.cross(&self.harmonic, &self.exact_dirichlet),
            coexact_vs_exact: self.cross(&self.coexact_neumann, &self.exact_dirichlet),
            boundary_n_vs_dirichlet: self.cross(&self.boundary_n, &self.harmonic_dirichlet),
            boundary_d_vs_neumann: self.cross(&self.boundary_d, &self.harmonic_neumann),
            boundary_n_vs_interior_n: self.cross(&self.boundary_n, &self.interior_n),
            boundary_d_vs_interior_d: self.cross(&self.boundary_d, &self.interior_d),
            exact_coexact_vs_neumann: guard(self.cross(&self.exact_coexact, &self.harmonic_neumann)),
            exact_coexact_vs_dirichlet: guard(self.cross(&self.exact_coexact, &self.harmonic_dirichlet)),
        }
    }

    pub fn report(&self) -> Result<HodgeReport> {
        let m = self.mass();
        let by_trace_n = interior_n_by_trace(self.fs, &self.harmonic_neumann)?;
        let by_trace_d = interior_d_by_trace(self.fs, &self.harmonic_dirichlet)?;
        Ok(HodgeReport {
            degree: self.degree,
            dimensions: self.dimensions(),
            cosines: self.poincare_duality_angles()?.cosines,
            orthogonality: self.orthogonality_residuals(),
            trace_criterion_distance_n: subspace_distance(&by_trace_n.columns, &self.interior_n.columns, m),
            trace_criterion_distance_d: subspace_distance(&by_trace_d.columns, &self.interior_d.columns, m),
        })
    }
}
