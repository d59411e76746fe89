//! Dense linear-algebra helpers shared by the discrete modules.
//!
//! Null spaces, ranges and pseudo-inverses all go through one rank rule:
//! singular values below `1e-8 * max` are discarded, and the last kept value
//! must exceed the first discarded one by a factor of at least `1e3`.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const RANK_CUTOFF: f64 = 1e-8;
pub const MIN_GAP: f64 = 1e3;

/// Numerical rank of a descending list of singular values.
pub fn numerical_rank(sv: &[f64], cutoff: f64, module: &'static str) -> Result<usize> {
    let Some(&top) = sv.first() else {
        return Ok(0);
    };
    if top <= 0.0 {
        return Ok(0);
    }
    let r = sv.iter().take_while(|&&s| s > cutoff * top).count();
    if r > 0 && r < sv.len() {
        let kept = sv[r - 1];
        let dropped = sv[r];
        if dropped > 0.0 && kept / dropped < MIN_GAP {
            return Err(Error::SpectralGap { module, kept, dropped });
        }
    }
    Ok(r)
}

struct SortedSvd {
    u: DMatrix<f64>,
    sv: Vec<f64>,
    v: DMatrix<f64>,
}

fn to_faer(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Full SVD with descending singular values; `v` is square (ncols x ncols).
fn full_svd(a: &DMatrix<f64>) -> SortedSvd {
    let svd = to_faer(a).svd().expect("svd converges");
    let k = a.nrows().min(a.ncols());
    let s = svd.S().column_vector();
    SortedSvd {
        u: from_faer(svd.U()),
        sv: (0..k).map(|i| s[i]).collect(),
        v: from_faer(svd.V()),
    }
}

/// Inverse of a symmetric positive definite matrix, or `None` if the
/// Cholesky factorization fails.
pub fn spd_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    use faer::linalg::solvers::DenseSolveCore;
    if a.is_empty() {
        return Some(DMatrix::zeros(0, 0));
    }
    let llt = to_faer(a).llt(Side::Lower).ok()?;
    Some(from_faer(llt.inverse().as_ref()))
}

/// Right singular vectors ordered by descending singular value.
pub fn right_singular_vectors(a: &DMatrix<f64>) -> DMatrix<f64> {
    full_svd(a).v
}

/// Descending singular values.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    to_faer(a).singular_values().expect("svd converges")
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the symmetric part of `a`.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (a + a.transpose()) * 0.5;
    let evd = to_faer(&sym).self_adjoint_eigen(Side::Lower).expect("evd converges");
    let s = evd.S().column_vector();
    ((0..n).map(|i| s[i]).collect(), from_faer(evd.U()))
}

/// Complex eigenvalues of a general square matrix as (re, im) pairs.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<(f64, f64)> {
    if a.is_empty() {
        return Vec::new();
    }
    to_faer(a)
        .eigenvalues()
        .expect("evd converges")
        .into_iter()
        .map(|z| (z.re, z.im))
        .collect()
}

/// Stack blocks vertically, scaling each to unit spectral norm.
pub fn stack_normalized(blocks: &[&DMatrix<f64>], ncols: usize) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, ncols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), ncols, "block column count");
        if b.nrows() == 0 {
            continue;
        }
        let norm = spectral_norm(b);
        let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        out.view_mut((at, 0), (b.nrows(), ncols)).copy_from(&(*b * scale));
        at += b.nrows();
    }
    out
}

pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a)[0]
}

/// Euclidean-orthonormal basis of the common null space of the stacked blocks.
pub fn null_space(blocks: &[&DMatrix<f64>], ncols: usize, module: &'static str) -> Result<DMatrix<f64>> {
    let a = stack_normalized(blocks, ncols);
    if a.nrows() == 0 || ncols == 0 {
        return Ok(DMatrix::identity(ncols, ncols));
    }
    let svd = full_svd(&a);
    let r = numerical_rank(&svd.sv, RANK_CUTOFF, module)?;
    Ok(svd.v.columns(r, ncols - r).into_owned())
}

/// Null space of `a` with singular values measured against `reference`
/// rather than against the largest singular value of `a`.
pub fn null_space_relative_to(a: &DMatrix<f64>, reference: f64, module: &'static str) -> Result<DMatrix<f64>> {
    let ncols = a.ncols();
    if a.nrows() == 0 || ncols == 0 || reference <= 0.0 {
        return Ok(DMatrix::identity(ncols, ncols));
    }
    let svd = full_svd(a);
    let mut sv = svd.sv.clone();
    sv.insert(0, reference);
    let r = numerical_rank(&sv, RANK_CUTOFF, module)? - 1;
    Ok(svd.v.columns(r, ncols - r).into_owned())
}

/// Euclidean-orthonormal basis of the column space.
pub fn column_space(a: &DMatrix<f64>, module: &'static str) -> Result<DMatrix<f64>> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return Ok(DMatrix::zeros(a.nrows(), 0));
    }
    let svd = full_svd(a);
    let r = numerical_rank(&svd.sv, RANK_CUTOFF, module)?;
    Ok(svd.u.columns(0, r).into_owned())
}

/// Numerical rank with the shared cutoff and gap rule.
pub fn rank(a: &DMatrix<f64>, module: &'static str) -> Result<usize> {
    if a.is_empty() {
        return Ok(0);
    }
    let svd = full_svd(a);
    numerical_rank(&svd.sv, RANK_CUTOFF, module)
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix, with its rank.
pub fn pinv_sym(a: &DMatrix<f64>, cutoff: f64, module: &'static str) -> Result<(DMatrix<f64>, usize)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((DMatrix::zeros(0, 0), 0));
    }
    let (values, vectors) = symmetric_eigen(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].abs().total_cmp(&values[i].abs()));
    let mags: Vec<f64> = order.iter().map(|&i| values[i].abs()).collect();
    let r = numerical_rank(&mags, cutoff, module)?;
    let kept = DMatrix::from_fn(n, r, |i, j| vectors[(i, order[j])]);
    let scaled = DMatrix::from_fn(n, r, |i, j| vectors[(i, order[j])] / values[order[j]]);
    Ok((scaled * kept.transpose(), r))
}

/// Moore-Penrose pseudo-inverse of a general matrix.
pub fn pinv(a: &DMatrix<f64>, module: &'static str) -> Result<DMatrix<f64>> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(DMatrix::zeros(n, m));
    }
    let svd = full_svd(a);
    let r = numerical_rank(&svd.sv, RANK_CUTOFF, module)?;
    let scaled = DMatrix::from_fn(n, r, |i, j| svd.v[(i, j)] / svd.sv[j]);
    Ok(scaled * svd.u.columns(0, r).transpose())
}

/// Rescale independent columns so that `Xᵀ M X = I`.
pub fn m_orthonormalize(x: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    if x.ncols() == 0 {
        return x.clone();
    }
    let g = x.transpose() * m * x;
    let (values, vectors) = symmetric_eigen(&g);
    let inv_sqrt = DMatrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            1.0 / values[i].max(f64::MIN_POSITIVE).sqrt()
        } else {
            0.0
        }
    });
    x * vectors * inv_sqrt
}

/// Largest entry of `Xᵀ M X - I`.
pub fn orthonormality_defect(x: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let g = x.transpose() * m * x - DMatrix::identity(x.ncols(), x.ncols());
    g.amax()
}

/// Cosines of principal angles between two M-orthonormal bases, descending,
/// with the paired principal vectors.
pub fn principal_cosines(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    m: &DMatrix<f64>,
) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let k = a.ncols().min(b.ncols());
    if k == 0 {
        return (Vec::new(), DMatrix::zeros(a.nrows(), 0), DMatrix::zeros(b.nrows(), 0));
    }
    let c = a.transpose() * m * b;
    let svd = full_svd(&c);
    let cos = svd.sv.iter().take(k).map(|s| s.clamp(0.0, 1.0)).collect();
    let left = a * svd.u.columns(0, k);
    let right = b * svd.v.columns(0, k);
    (cos, left, right)
}

/// Spectral distance between the projectors onto two M-orthonormal bases,
/// i.e. the sine of the largest principal angle. Returns 1 when the
/// dimensions differ.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let r = b - a * (a.transpose() * m * b);
    let g = r.transpose() * m * &r;
    let (values, _) = symmetric_eigen(&g);
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt().min(1.0)
}

/// M-orthogonal projection onto the span of an M-orthonormal basis.
pub fn project(basis: &DMatrix<f64>, m: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if basis.ncols() == 0 {
        return DVector::zeros(v.len());
    }
    basis * (basis.transpose() * (m * v))
}

/// Select rows of a matrix.
pub fn select_rows(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Select columns of a matrix.
pub fn select_cols(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

/// Submatrix by row and column index lists.
pub fn submatrix(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// 0/1 matrix that selects `rows` out of `n` entries.
pub fn selector(rows: &[usize], n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(rows.len(), n);
    for (i, &r) in rows.iter().enumerate() {
        s[(i, r)] = 1.0;
    }
    s
}

pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn null_space_of_rank_one() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let z = null_space(&[&a], 3, "test").unwrap();
        assert_eq!(z.ncols(), 2);
        assert!((&a * &z).amax() < 1e-14);
    }

    #[test]
    fn wide_matrix_null_space_is_complete() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
        let z = null_space(&[&a], 4, "test").unwrap();
        assert_eq!(z.ncols(), 2);
    }

    #[test]
    fn missing_gap_is_an_error() {
        let sv = [1.0, 0.5, 2e-8, 1e-8];
        assert!(matches!(
            numerical_rank(&sv, 1.5e-8, "test"),
            Err(Error::SpectralGap { .. })
        ));
        assert_eq!(numerical_rank(&[1.0, 1e-3, 1e-14], 1e-8, "test").unwrap(), 2);
    }

    #[test]
    fn absolute_reference_sees_round_off_as_zero() {
        let a = DMatrix::from_row_slice(1, 2, &[1e-16, 0.0]);
        assert_eq!(null_space(&[&a], 2, "test").unwrap().ncols(), 1);
        assert_eq!(null_space_relative_to(&a, 1.0, "test").unwrap().ncols(), 2);
    }

    #[test]
    fn pinv_sym_inverts_on_range() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0]);
        let (p, r) = pinv_sym(&a, 1e-8, "test").unwrap();
        assert_eq!(r, 2);
        let x = DVector::from_vec(vec![1.0, -2.0, 1.0]);
        assert_relative_eq!(&a * (&p * &x), x, epsilon = 1e-12);
    }

    #[test]
    fn lines_at_forty_five_degrees() {
        let m = DMatrix::identity(2, 2);
        let a = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let b = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]) / 2f64.sqrt();
        let (cos, _, _) = principal_cosines(&a, &b, &m);
        assert_relative_eq!(cos[0], 0.5f64.sqrt(), epsilon = 1e-15);
    }
}
