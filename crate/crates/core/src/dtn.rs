//! Dirichlet-to-Neumann operator for forms, Hilbert transform and cup products.
//!
//! Boundary forms come in two representations. A primal boundary p-form is a
//! cochain on the p-simplices of ∂M. A form of the complementary degree
//! n−1−p (the image of a normal trace) is stored weakly, as a functional on
//! primal p-cochains, paired by ∫ a ∧ ψ = ψ · a.
//!
//! With these conventions:
//!
//! * Λ_p on primal p-forms is the Schur complement of dᵀMd onto the boundary
//!   unknowns; it equals the normal trace of dω for the harmonic extension ω.
//! * Λ_{n−p−1} on functionals over p-cochains is
//!   `K_p = (−1)^{p(n−p)+p} R P_closed M⁻¹ Rᵀ`.
//! * d∂ on a functional over p-cochains is `(−1)^p d∂ᵀ`.
//! * T = d∂ Λ⁺ alternates between the two representations.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{Carrier, Cochain, FormSpace};
use crate::hodge::{harmonic_dirichlet_fields, HodgeDegree, SubspaceBasis};
use crate::linalg::{
    column_space, hstack, m_orthonormalize, null_space, null_space_relative_to, pinv, pinv_sym, principal_cosines,
    rank, selector, spectral_norm, submatrix, subspace_distance, RANK_CUTOFF,
};

const MODULE: &str = "dtn";

/// Eigenvalues of T̃² below this modulus count as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-8;

/// Tolerance for deciding that a functional lies in the image of Λ.
pub const IMAGE_TOL: f64 = 1e-8;

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn rel_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let scale = a.norm().max(b.norm());
    let diff = (a - b).norm();
    if scale > 1e-12 {
        diff / scale
    } else {
        diff
    }
}

/// Residuals of the harmonic extension, maximized over boundary basis vectors.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BvpResiduals {
    pub trace: f64,
    pub coclosed: f64,
    pub harmonic: f64,
}

/// Solution of the boundary value problem for one boundary form.
#[derive(Clone, Debug)]
pub struct BvpSolution {
    pub omega: Cochain,
    pub residuals: BvpResiduals,
}

/// Λ_p as a matrix from primal boundary p-cochains to functionals on them.
#[derive(Clone, Debug)]
pub struct DtnOperator {
    pub degree: usize,
    pub matrix: DMatrix<f64>,
    pub residuals: BvpResiduals,
}

/// T in degree p, in both directions.
#[derive(Clone, Debug)]
pub struct HilbertTransform {
    pub degree: usize,
    /// Primal boundary p-forms to functionals on (p−1)-cochains.
    pub primal_to_dual: DMatrix<f64>,
    /// Functionals on (p−1)-cochains to primal boundary p-forms.
    pub dual_to_primal: DMatrix<f64>,
    pub tolerance: f64,
}

/// T̃² restricted to the traces of a family of harmonic fields.
#[derive(Clone, Debug)]
pub struct TSquared {
    pub degree: usize,
    /// Matrix of T̃² in the basis of traces.
    pub matrix: DMatrix<f64>,
    /// Real parts of the eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors in the basis of traces, one column per eigenvalue.
    pub eigenvectors: DMatrix<f64>,
    pub max_imaginary: f64,
    /// Relative failure of the trace span to be invariant under T².
    pub invariance_residual: f64,
}

/// Result of a sign-sensitive identity check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SignedResidual {
    /// Residual with the sign used by this implementation.
    pub residual: f64,
    /// Residual with the opposite overall sign.
    pub opposite_sign_residual: f64,
}

impl SignedResidual {
    pub fn absolute(&self) -> f64 {
        self.residual.min(self.opposite_sign_residual)
    }
}

/// The two families spanning ker Λ_p.
#[derive(Clone, Debug, Serialize)]
pub struct KernelDecomposition {
    pub degree: usize,
    #[serde(skip)]
    pub boundary_traces: DMatrix<f64>,
    #[serde(skip)]
    pub exact_forms: DMatrix<f64>,
    pub kernel_dim: usize,
    pub exact_dim: usize,
    pub boundary_n_dim: usize,
    pub quotient_dim: usize,
    /// Distance between ker Λ_p and the span of both families.
    pub sum_residual: f64,
    /// Largest cosine between the two families.
    pub max_cross_cosine: f64,
}

/// Both sides of the cup-product reconstruction.
#[derive(Clone, Debug)]
pub struct CupProduct {
    pub degree: usize,
    pub reconstructed: DVector<f64>,
    pub direct: DVector<f64>,
    pub image_residual: f64,
    pub residual: f64,
}

/// Cup-product residual for one pair of harmonic basis fields.
#[derive(Clone, Debug, Serialize)]
pub struct CupEntry {
    pub p: usize,
    pub q: usize,
    pub alpha_index: usize,
    pub beta_index: usize,
    /// True when β is a boundary Dirichlet field, where the identity is a theorem.
    pub boundary_beta: bool,
    pub residual: f64,
    pub image_residual: f64,
}

/// JSON-serializable per-degree summary of the DtN calculus.
#[derive(Clone, Debug, Serialize)]
pub struct DtnReport {
    pub degree: usize,
    pub lambda_rank: usize,
    pub kernel_dim: usize,
    /// Rank of Λ_{n−p−1} acting on functionals over p-cochains.
    pub complementary_image_dim: usize,
    pub kernel_image_distance: (f64, f64),
    pub exact_annihilation: f64,
    /// |eigenvalues| of T̃² on H^p_N traces, ascending; empty in degree 0.
    pub t_squared_eigenvalues: Vec<f64>,
    /// Squared duality-angle cosines from the SVD pipeline, ascending.
    pub cos_squared: Vec<f64>,
    /// Number of eigenvalues above [`ZERO_EIGENVALUE_TOL`].
    pub nonzero_eigenvalues: usize,
    /// Pairwise |eigenvalue − cos²| between the non-zero eigenvalues and the
    /// cosines after sorting; empty when the counts differ.
    pub discrepancies: Vec<f64>,
    pub cup_products: Vec<CupEntry>,
}

/// Assembled operators of the DtN calculus on one mesh.
#[derive(Clone, Debug)]
pub struct Dtn<'a> {
    fs: &'a FormSpace,
    extension: Vec<DMatrix<f64>>,
    residuals: Vec<BvpResiduals>,
    schur: Vec<DMatrix<f64>>,
    schur_pinv: Vec<DMatrix<f64>>,
    dual: Vec<DMatrix<f64>>,
    dual_pinv: Vec<DMatrix<f64>>,
    harmonic_dirichlet: Vec<SubspaceBasis>,
}

impl<'a> Dtn<'a> {
    pub fn new(fs: &'a FormSpace) -> Result<Self> {
        if !fs.has_boundary() {
            return Err(Error::params(MODULE, "the DtN map needs a mesh with nonempty boundary"));
        }
        let n = fs.dim();
        let mut dtn = Dtn {
            fs,
            extension: Vec::new(),
            residuals: Vec::new(),
            schur: Vec::new(),
            schur_pinv: Vec::new(),
            dual: Vec::new(),
            dual_pinv: Vec::new(),
            harmonic_dirichlet: (0..=n)
                .map(|p| harmonic_dirichlet_fields(fs, p))
                .collect::<Result<_>>()?,
        };
        for p in 0..n {
            let (ext, res) = dtn.build_extension(p)?;
            dtn.extension.push(ext);
            dtn.residuals.push(res);
            let s = dtn.build_schur(p)?;
            dtn.schur_pinv.push(pinv_sym(&s, RANK_CUTOFF, MODULE)?.0);
            dtn.schur.push(s);
            let k = dtn.build_dual(p)?;
            dtn.dual_pinv.push(pinv_sym(&k, RANK_CUTOFF, MODULE)?.0);
            dtn.dual.push(k);
        }
        Ok(dtn)
    }

    pub fn form_space(&self) -> &FormSpace {
        self.fs
    }

    fn check_boundary_degree(&self, p: usize) -> Result<()> {
        if p + 1 > self.fs.dim() {
            return Err(Error::degree(MODULE, format!("no boundary forms of degree {p}")));
        }
        Ok(())
    }

    fn stiffness(&self, p: usize) -> DMatrix<f64> {
        let d = self.fs.d_matrix(p);
        d.transpose() * self.fs.mass(p + 1) * d
    }

    /// Harmonic extension operator: boundary p-cochains to p-cochains on M.
    fn build_extension(&self, p: usize) -> Result<(DMatrix<f64>, BvpResiduals)> {
        let fs = self.fs;
        let (ni, nb) = (fs.interior_indices(p), fs.boundary_indices(p));
        let a = self.stiffness(p);
        let (a_ii_pinv, _) = pinv_sym(&submatrix(&a, ni, ni), fs.tolerance(), MODULE)?;
        let ext_i = -(a_ii_pinv * submatrix(&a, ni, nb));
        let mut x = selector(nb, fs.count(p)).transpose() + selector(ni, fs.count(p)).transpose() * ext_i;
        if p >= 1 {
            let c = fs.coclosed_constraint(p);
            let e = fs.d_matrix(p - 1) * selector(fs.interior_indices(p - 1), fs.count(p - 1)).transpose();
            let (l_pinv, _) = pinv_sym(&(&c * &e), fs.tolerance(), MODULE)?;
            let fix = &e * (l_pinv * (&c * &x));
            x -= fix;
        }
        let hd = &self.harmonic_dirichlet[p].columns;
        if hd.ncols() > 0 {
            let proj = hd * (hd.transpose() * fs.mass(p) * &x);
            x -= proj;
        }
        let scale = |m: &DMatrix<f64>| m.amax().max(1e-300);
        let trace = (fs.tangential(p) * &x - DMatrix::identity(nb.len(), nb.len())).amax();
        let coclosed = if p == 0 {
            0.0
        } else {
            let c = fs.coclosed_constraint(p);
            (&c * &x).amax() / (scale(&c) * scale(&x))
        };
        let ai = crate::linalg::select_rows(&a, ni);
        let harmonic = (&ai * &x).amax() / (scale(&a) * scale(&x));
        Ok((
            x,
            BvpResiduals {
                trace,
                coclosed,
                harmonic,
            },
        ))
    }

    fn build_schur(&self, p: usize) -> Result<DMatrix<f64>> {
        let fs = self.fs;
        let (ni, nb) = (fs.interior_indices(p), fs.boundary_indices(p));
        let a = self.stiffness(p);
        let (a_ii_pinv, _) = pinv_sym(&submatrix(&a, ni, ni), fs.tolerance(), MODULE)?;
        let s = submatrix(&a, nb, nb) - submatrix(&a, nb, ni) * a_ii_pinv * submatrix(&a, ni, nb);
        Ok((&s + s.transpose()) * 0.5)
    }

    fn build_dual(&self, p: usize) -> Result<DMatrix<f64>> {
        let fs = self.fs;
        let n = fs.dim();
        let z = m_orthonormalize(&null_space(&[&fs.d_matrix(p)], fs.count(p), MODULE)?, fs.mass(p));
        let rz = fs.tangential(p) * z;
        Ok(rz.clone() * rz.transpose() * sign(p * (n - p) + p))
    }

    /// Harmonic extension ω of φ: i*ω = φ, δω = 0, dω harmonic, ω ⊥ H^p_D.
    pub fn solve_bvp(&self, phi: &Cochain) -> Result<BvpSolution> {
        let p = phi.degree;
        self.check_boundary_degree(p)?;
        if phi.carrier != Carrier::Boundary || phi.values.len() != self.fs.boundary_count(p) {
            return Err(Error::degree(MODULE, format!("expected a boundary {p}-cochain")));
        }
        let omega = &self.extension[p] * &phi.values;
        let fs = self.fs;
        let trace = (fs.tangential(p) * &omega - &phi.values).amax();
        let scale = phi.values.amax().max(1e-300);
        let coclosed = if p == 0 {
            0.0
        } else {
            (fs.coclosed_constraint(p) * &omega).amax() / scale
        };
        let a = self.stiffness(p);
        let aw = a * &omega;
        let harmonic = fs.interior_indices(p).iter().map(|&i| aw[i].abs()).fold(0.0, f64::max) / scale;
        Ok(BvpSolution {
            omega: Cochain::new(p, Carrier::Interior, omega),
            residuals: BvpResiduals {
                trace,
                coclosed,
                harmonic,
            },
        })
    }

    /// Λ_p φ = i*⋆dω, as the normal trace of dω for the harmonic extension.
    pub fn lambda(&self, phi: &Cochain) -> Result<Cochain> {
        let sol = self.solve_bvp(phi)?;
        let dw = self.fs.d(&sol.omega)?;
        self.fs.normal_trace(&dw)
    }

    /// Λ_p assembled column by column from the harmonic extension.
    pub fn operator(&self, p: usize) -> Result<DtnOperator> {
        self.check_boundary_degree(p)?;
        let matrix = self.fs.normal(p + 1) * self.fs.d_matrix(p) * &self.extension[p];
        Ok(DtnOperator {
            degree: p,
            matrix: (&matrix + matrix.transpose()) * 0.5,
            residuals: self.residuals[p].clone(),
        })
    }

    /// Λ_p as the Schur complement of dᵀMd (equal to [`Dtn::operator`]).
    pub fn lambda_matrix(&self, p: usize) -> &DMatrix<f64> {
        &self.schur[p]
    }

    /// Λ_{n−p−1} acting on functionals over boundary p-cochains.
    pub fn lambda_dual_matrix(&self, p: usize) -> &DMatrix<f64> {
        &self.dual[p]
    }

    /// d∂ on functionals over boundary p-cochains, landing on (p−1)-cochains.
    pub fn dual_boundary_d(&self, p: usize) -> DMatrix<f64> {
        if p == 0 {
            return DMatrix::zeros(0, self.fs.boundary_count(0));
        }
        self.fs.boundary_d_matrix(p - 1).transpose() * sign(p)
    }

    /// T = d∂Λ⁺ on primal boundary p-forms and on functionals over (p−1)-cochains.
    pub fn hilbert_transform(&self, p: usize) -> Result<HilbertTransform> {
        self.check_boundary_degree(p)?;
        if p == 0 {
            return Err(Error::degree(MODULE, "T lowers no degree below 0"));
        }
        Ok(HilbertTransform {
            degree: p,
            primal_to_dual: self.dual_boundary_d(p) * &self.dual_pinv[p],
            dual_to_primal: self.fs.boundary_d_matrix(p - 1) * &self.schur_pinv[p - 1],
            tolerance: RANK_CUTOFF,
        })
    }

    /// T² on primal boundary p-forms.
    pub fn t_squared_matrix(&self, p: usize) -> Result<DMatrix<f64>> {
        let t = self.hilbert_transform(p)?;
        Ok(&t.dual_to_primal * &t.primal_to_dual)
    }

    /// T̃² on the span of the given boundary traces.
    pub fn t_squared_on(&self, p: usize, traces: &DMatrix<f64>) -> Result<TSquared> {
        let t2 = self.t_squared_matrix(p)?;
        let image = &t2 * traces;
        let coeff = pinv(traces, MODULE)? * &image;
        let invariance_residual = if image.norm() > 0.0 {
            (traces * &coeff - &image).norm() / image.norm()
        } else {
            0.0
        };
        let k = coeff.nrows();
        let mut eigenvalues = Vec::with_capacity(k);
        let mut max_imaginary: f64 = 0.0;
        if k > 0 {
            for (re, im) in crate::linalg::eigenvalues(&coeff) {
                eigenvalues.push(re);
                max_imaginary = max_imaginary.max(im.abs());
            }
        }
        eigenvalues.sort_by(f64::total_cmp);
        let mut eigenvectors = DMatrix::zeros(k, k);
        for (j, &lam) in eigenvalues.iter().enumerate() {
            let shifted = &coeff - DMatrix::identity(k, k) * lam;
            let v = crate::linalg::right_singular_vectors(&shifted);
            eigenvectors.set_column(j, &v.column(k - 1));
        }
        Ok(TSquared {
            degree: p,
            matrix: coeff,
            eigenvalues,
            eigenvectors,
            max_imaginary,
            invariance_residual,
        })
    }

    /// T̃² on the traces of H^p_N.
    pub fn t_squared(&self, p: usize) -> Result<TSquared> {
        let hn = crate::hodge::harmonic_neumann_fields(self.fs, p)?;
        self.t_squared_on(p, &(self.fs.tangential(p) * hn.columns))
    }

    /// G_{n−p−1} = Λ_{n−p−1} + (−1)^{qn+q+n} d∂ Λ_{p−1}⁺ d∂ with q = n−p−1,
    /// acting on functionals over boundary p-cochains.
    pub fn g_operator(&self, p: usize) -> Result<DMatrix<f64>> {
        self.check_boundary_degree(p)?;
        let n = self.fs.dim();
        let q = n - p - 1;
        let mut g = self.dual[p].clone();
        if p >= 1 {
            let second = self.fs.boundary_d_matrix(p - 1) * &self.schur_pinv[p - 1] * self.dual_boundary_d(p);
            g += second * sign(q * n + q + n);
        }
        Ok(g)
    }

    fn documented(&self, lhs: DVector<f64>, rhs: DVector<f64>, s: f64) -> SignedResidual {
        SignedResidual {
            residual: rel_diff(&lhs, &(&rhs * s)),
            opposite_sign_residual: rel_diff(&lhs, &(&rhs * -s)),
        }
    }

    /// T i*ω against the normal trace of the Dirichlet projection of ω ∈ H^p_N.
    ///
    /// The identity holds as `T i*ω = −(−1)^{np+1} i*⋆(P_D ω)`.
    pub fn t_projection_check(&self, hodge: &HodgeDegree, omega: &DVector<f64>) -> Result<SignedResidual> {
        let p = hodge.degree;
        let n = self.fs.dim();
        let t = self.hilbert_transform(p)?;
        let lhs = &t.primal_to_dual * (self.fs.tangential(p) * omega);
        let rhs = self.fs.normal(p) * hodge.project_dirichlet(omega);
        Ok(self.documented(lhs, rhs, -sign(n * p + 1)))
    }

    /// T i*⋆λ against the trace of the Neumann projection of λ ∈ H^p_D.
    ///
    /// The identity holds as `T i*⋆λ = −(−1)^{n+p+1} i*(P_N λ)`.
    pub fn t_projection_dirichlet_check(&self, hodge: &HodgeDegree, lambda: &DVector<f64>) -> Result<SignedResidual> {
        let p = hodge.degree;
        let n = self.fs.dim();
        let t = self.hilbert_transform(p)?;
        let lhs = &t.dual_to_primal * (self.fs.normal(p) * lambda);
        let rhs = self.fs.tangential(p) * hodge.project_neumann(lambda);
        Ok(self.documented(lhs, rhs, -sign(n + p + 1)))
    }

    /// ker Λ_p = i*(boundary N-fields) ⊕ exact boundary p-forms.
    pub fn kernel_decomposition(&self, hodge: &HodgeDegree) -> Result<KernelDecomposition> {
        let p = hodge.degree;
        self.check_boundary_degree(p)?;
        let fs = self.fs;
        let s = &self.schur[p];
        let kernel = null_space_relative_to(s, spectral_norm(s), MODULE)?;
        let exact = if p == 0 {
            DMatrix::zeros(fs.boundary_count(0), 0)
        } else {
            column_space(&fs.boundary_d_matrix(p - 1), MODULE)?
        };
        let traces = fs.tangential(p) * &hodge.boundary_n.columns;
        let trace_basis = column_space(&traces, MODULE)?;
        let both = column_space(&hstack(&trace_basis, &exact), MODULE)?;
        let eye = DMatrix::identity(fs.boundary_count(p), fs.boundary_count(p));
        let (cos, _, _) = principal_cosines(&trace_basis, &exact, &eye);
        Ok(KernelDecomposition {
            degree: p,
            kernel_dim: kernel.ncols(),
            exact_dim: exact.ncols(),
            boundary_n_dim: hodge.boundary_n.dim(),
            quotient_dim: kernel.ncols().saturating_sub(exact.ncols()),
            sum_residual: subspace_distance(&kernel, &both, &eye),
            max_cross_cosine: cos.first().copied().unwrap_or(0.0),
            boundary_traces: traces,
            exact_forms: exact,
        })
    }

    /// Distance between ker Λ_p and im Λ_{n−p−1}, in both representations.
    pub fn harmonic_trace_distance(&self, p: usize) -> Result<(f64, f64)> {
        self.check_boundary_degree(p)?;
        let nb = self.fs.boundary_count(p);
        let eye = DMatrix::identity(nb, nb);
        let (s, k) = (&self.schur[p], &self.dual[p]);
        let ker_s = null_space_relative_to(s, spectral_norm(s), MODULE)?;
        let im_k = column_space(k, MODULE)?;
        let ker_k = null_space_relative_to(k, spectral_norm(k), MODULE)?;
        let im_s = column_space(s, MODULE)?;
        Ok((
            subspace_distance(&ker_s, &im_k, &eye),
            subspace_distance(&ker_k, &im_s, &eye),
        ))
    }

    /// Largest relative value of Λ_p on exact boundary forms.
    pub fn exact_annihilation(&self, p: usize) -> Result<f64> {
        self.check_boundary_degree(p)?;
        if p == 0 {
            return Ok(0.0);
        }
        let d = self.fs.boundary_d_matrix(p - 1);
        let s = &self.schur[p];
        let scale = spectral_norm(s) * spectral_norm(&d);
        Ok(if scale > 0.0 {
            spectral_norm(&(s * d)) / scale
        } else {
            0.0
        })
    }

    /// Largest relative change of T under a change of Λ-preimage.
    pub fn hilbert_well_definedness(&self, p: usize) -> Result<f64> {
        self.check_boundary_degree(p)?;
        if p == 0 {
            return Ok(0.0);
        }
        let k = &self.dual[p];
        let ker = null_space_relative_to(k, spectral_norm(k), MODULE)?;
        let dd = self.dual_boundary_d(p);
        let scale = spectral_norm(&dd);
        Ok(if scale > 0.0 {
            spectral_norm(&(dd * ker)) / scale
        } else {
            0.0
        })
    }

    /// Λ_{q−1}⁺ ψ, failing if ψ is not in the image of Λ_{q−1}.
    fn preimage(&self, q: usize, psi: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let mu = &self.schur_pinv[q - 1] * psi;
        let back = &self.schur[q - 1] * &mu;
        let residual = rel_diff(&back, psi);
        Ok((mu, residual))
    }

    fn boundary_wedge(&self, p: usize, a: &DVector<f64>, r: usize, b: &DVector<f64>) -> Result<DVector<f64>> {
        let x = Cochain::new(p, Carrier::Boundary, a.clone());
        let y = Cochain::new(r, Carrier::Boundary, b.clone());
        Ok(self.fs.wedge(&x, &y)?.values)
    }

    /// (−1)^p Λ(φ ∧ Λ⁺ψ) with φ = i*α, ψ = i*⋆β, against i*⋆η for η the
    /// Dirichlet-harmonic part of α ∧ β.
    pub fn cup_product_reconstruct(
        &self,
        p: usize,
        alpha: &DVector<f64>,
        q: usize,
        beta: &DVector<f64>,
    ) -> Result<CupProduct> {
        let cup = self.cup_product_evaluate(p, alpha, q, beta)?;
        if cup.image_residual > IMAGE_TOL {
            return Err(Error::NotInImage {
                residual: cup.image_residual,
            });
        }
        Ok(cup)
    }

    /// As [`Dtn::cup_product_reconstruct`] but reporting, not rejecting, a ψ
    /// outside the image of Λ.
    pub fn cup_product_evaluate(
        &self,
        p: usize,
        alpha: &DVector<f64>,
        q: usize,
        beta: &DVector<f64>,
    ) -> Result<CupProduct> {
        let fs = self.fs;
        let n = fs.dim();
        if q == 0 {
            return Err(Error::degree(MODULE, "β must have degree at least 1"));
        }
        let r = p + q;
        if r > n {
            return Ok(CupProduct {
                degree: r,
                reconstructed: DVector::zeros(0),
                direct: DVector::zeros(0),
                image_residual: 0.0,
                residual: 0.0,
            });
        }
        if alpha.len() != fs.count(p) || beta.len() != fs.count(q) {
            return Err(Error::degree(MODULE, "cup product inputs have the wrong length"));
        }
        let phi = fs.tangential(p) * alpha;
        let psi = fs.normal(q) * beta;
        let (mu, image_residual) = self.preimage(q, &psi)?;
        let w = self.boundary_wedge(p, &phi, q - 1, &mu)?;
        let reconstructed = &self.schur[r - 1] * w * sign(p);
        let ab = fs.wedge(
            &Cochain::new(p, Carrier::Interior, alpha.clone()),
            &Cochain::new(q, Carrier::Interior, beta.clone()),
        )?;
        let hd = &self.harmonic_dirichlet[r];
        let eta = hd.project(fs.mass(r), &ab.values);
        let direct = fs.normal(r) * eta;
        let residual = rel_diff(&reconstructed, &direct);
        Ok(CupProduct {
            degree: r,
            reconstructed,
            direct,
            image_residual,
            residual,
        })
    }

    /// Change of Λ(φ ∧ (μ + σ)) relative to Λ(φ ∧ μ) for σ in ker Λ_{q−1}.
    pub fn well_definedness_check(
        &self,
        p: usize,
        phi: &DVector<f64>,
        q: usize,
        psi: &DVector<f64>,
        sigma: &DVector<f64>,
    ) -> Result<f64> {
        let r = p + q;
        if q == 0 || r > self.fs.dim() {
            return Ok(0.0);
        }
        let (mu, _) = self.preimage(q, psi)?;
        let base = &self.schur[r - 1] * self.boundary_wedge(p, phi, q - 1, &mu)?;
        let moved = &self.schur[r - 1] * self.boundary_wedge(p, phi, q - 1, &(&mu + sigma))?;
        let scale = base.norm().max(phi.norm() * psi.norm());
        Ok(if scale > 0.0 {
            (moved - base).norm() / scale
        } else {
            0.0
        })
    }

    /// Summary of Λ_p, T̃² and cup products in the degree of `hodge`.
    pub fn report(&self, hodge: &HodgeDegree) -> Result<DtnReport> {
        let p = hodge.degree;
        self.check_boundary_degree(p)?;
        let fs = self.fs;
        let n = fs.dim();
        let s = &self.schur[p];
        let kernel_dim = null_space_relative_to(s, spectral_norm(s), MODULE)?.ncols();
        let mut t_squared_eigenvalues: Vec<f64> = if p == 0 {
            Vec::new()
        } else {
            self.t_squared(p)?.eigenvalues.iter().map(|e| e.abs()).collect()
        };
        t_squared_eigenvalues.sort_by(f64::total_cmp);
        let mut cos_squared: Vec<f64> = hodge.poincare_duality_angles()?.cosines.iter().map(|c| c * c).collect();
        cos_squared.sort_by(f64::total_cmp);
        let nonzero: Vec<f64> = t_squared_eigenvalues
            .iter()
            .copied()
            .filter(|e| *e > ZERO_EIGENVALUE_TOL)
            .collect();
        let discrepancies = if nonzero.len() == cos_squared.len() {
            nonzero.iter().zip(&cos_squared).map(|(a, b)| (a - b).abs()).collect()
        } else {
            Vec::new()
        };
        let mut cup_products = Vec::new();
        for q in 1..=n - p {
            let beta = HodgeDegree::new(fs, q)?;
            for i in 0..hodge.harmonic_neumann.dim() {
                let alpha = hodge.harmonic_neumann.columns.column(i).into_owned();
                for j in 0..beta.harmonic_dirichlet.dim() {
                    let b = beta.harmonic_dirichlet.columns.column(j).into_owned();
                    let cup = self.cup_product_evaluate(p, &alpha, q, &b)?;
                    let in_boundary = beta.boundary_d.dim() > 0
                        && (beta.boundary_d.project(fs.mass(q), &b) - &b).norm() <= 1e-8 * b.norm();
                    cup_products.push(CupEntry {
                        p,
                        q,
                        alpha_index: i,
                        beta_index: j,
                        boundary_beta: in_boundary,
                        residual: cup.residual,
                        image_residual: cup.image_residual,
                    });
                }
            }
        }
        Ok(DtnReport {
            degree: p,
            lambda_rank: rank(s, MODULE)?,
            kernel_dim,
            complementary_image_dim: rank(&self.dual[p], MODULE)?,
            kernel_image_distance: self.harmonic_trace_distance(p)?,
            exact_annihilation: self.exact_annihilation(p)?,
            nonzero_eigenvalues: nonzero.len(),
            t_squared_eigenvalues,
            cos_squared,
            discrepancies,
            cup_products,
        })
    }

    /// Basis of ker Λ_p on primal boundary p-cochains.
    pub fn kernel_basis(&self, p: usize) -> Result<DMatrix<f64>> {
        self.check_boundary_degree(p)?;
        let s = &self.schur[p];
        null_space_relative_to(s, spectral_norm(s), MODULE)
    }

    /// Λ_p i*γ against i*⋆dρ for a primitive γ = ρ + ε + c of dρ, where ε
    /// vanishes on ∂M and c is closed.
    pub fn mixed_primitive_residual(
        &self,
        p: usize,
        rho: &DVector<f64>,
        epsilon: &DVector<f64>,
        closed: &DVector<f64>,
    ) -> Result<f64> {
        self.check_boundary_degree(p)?;
        let fs = self.fs;
        if [rho, epsilon, closed].iter().any(|v| v.len() != fs.count(p)) {
            return Err(Error::degree(MODULE, format!("primitive parts must be {p}-cochains")));
        }
        let gamma = rho + epsilon + closed;
        let lhs = &self.schur[p] * (fs.tangential(p) * gamma);
        let rhs = fs.normal(p + 1) * (fs.d_matrix(p) * rho);
        Ok(rel_diff(&lhs, &rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_annulus;

    #[test]
    fn zero_data_gives_zero_extension() {
        let fs = FormSpace::new(&generate_annulus(1, 6, 1.0, 2.0).unwrap()).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        for p in 0..2 {
            let phi = fs.zeros(p, Carrier::Boundary);
            assert_eq!(dtn.solve_bvp(&phi).unwrap().omega.values.amax(), 0.0);
        }
    }

    #[test]
    fn column_assembly_matches_schur_complement() {
        let fs = FormSpace::new(&generate_annulus(2, 8, 1.0, 2.0).unwrap()).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        for p in 0..2 {
            let op = dtn.operator(p).unwrap();
            let s = dtn.lambda_matrix(p);
            assert!((&op.matrix - s).amax() < 1e-10 * s.amax(), "degree {p}");
        }
    }

    #[test]
    fn closed_mesh_is_rejected() {
        let fs = FormSpace::new(&crate::mesh::generate_flat_torus(3).unwrap()).unwrap();
        assert_eq!(Dtn::new(&fs).unwrap_err().code(), "params");
    }
}
