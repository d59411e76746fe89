//! Whitney-form integrals on a single simplex, assembled into global matrices.
//!
//! With barycentric coordinates λ_0..λ_k on a k-simplex, the Whitney form of a
//! face σ = (σ_0..σ_p) is W_σ = p! Σ_i (−1)^i λ_{σ_i} dλ_{σ∖σ_i}. Every integral
//! reduces to monomials ∫λ^α = k! Π α_i! / (k + |α|)! · vol and to Gram
//! determinants of the barycentric gradients.

use nalgebra::{DMatrix, DVector};

use crate::mesh::{MeshGeometry, SimplicialComplex};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

struct Local {
    k: usize,
    vol: f64,
    grad_gram: DMatrix<f64>,
}

impl Local {
    fn new(geometry: &MeshGeometry, simplex: &[usize]) -> Self {
        let k = simplex.len() - 1;
        if k == 0 {
            return Local {
                k,
                vol: 1.0,
                grad_gram: DMatrix::zeros(1, 1),
            };
        }
        let g = geometry.edge_gram(simplex);
        let vol = g.determinant().max(0.0).sqrt() / factorial(k);
        let gi = g.try_inverse().expect("nondegenerate simplex");
        let mut a = DMatrix::zeros(k + 1, k);
        for j in 0..k {
            a[(0, j)] = -1.0;
            a[(j + 1, j)] = 1.0;
        }
        let grad_gram = &a * gi * a.transpose();
        Local { k, vol, grad_gram }
    }

    fn monomial(&self, idx: &[usize]) -> f64 {
        let mut mult = vec![0usize; self.k + 1];
        for &i in idx {
            mult[i] += 1;
        }
        let num: f64 = factorial(self.k) * mult.iter().map(|&m| factorial(m)).product::<f64>();
        num / factorial(self.k + idx.len()) * self.vol
    }

    fn gram_det(&self, rows: &[usize], cols: &[usize]) -> f64 {
        if rows.is_empty() {
            return 1.0;
        }
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.grad_gram[(rows[i], cols[j])]).determinant()
    }
}

fn without(s: &[usize], i: usize) -> Vec<usize> {
    let mut v = s.to_vec();
    v.remove(i);
    v
}

fn sign(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Local faces of a top simplex with their global indices.
fn local_faces(complex: &SimplicialComplex, top: &[usize], p: usize) -> Vec<(Vec<usize>, usize)> {
    combinations(top.len(), p + 1)
        .into_iter()
        .map(|f| {
            let verts: Vec<usize> = f.iter().map(|&i| top[i]).collect();
            let g = complex.index_of(&verts).expect("face of a top simplex");
            (f, g)
        })
        .collect()
}

/// Galerkin mass matrix of Whitney p-forms.
pub fn assemble_mass(complex: &SimplicialComplex, geometry: &MeshGeometry, p: usize) -> DMatrix<f64> {
    let n = complex.dim();
    let size = complex.count(p);
    let mut m = DMatrix::zeros(size, size);
    let pf2 = factorial(p).powi(2);
    for top in complex.simplices(n) {
        let local = Local::new(geometry, top);
        let faces = local_faces(complex, top, p);
        for (s, gs) in &faces {
            for (t, gt) in &faces {
                let mut v = 0.0;
                for i in 0..=p {
                    for j in 0..=p {
                        v += sign(i + j)
                            * local.monomial(&[s[i], t[j]])
                            * local.gram_det(&without(s, i), &without(t, j));
                    }
                }
                m[(*gs, *gt)] += pf2 * v;
            }
        }
    }
    m
}

/// Load vector ∫ ⟨W(a) ∧ W(b), W_c⟩ over all (p+q)-faces c.
pub fn wedge_load(
    complex: &SimplicialComplex,
    geometry: &MeshGeometry,
    p: usize,
    q: usize,
    a: &DVector<f64>,
    b: &DVector<f64>,
) -> DVector<f64> {
    let n = complex.dim();
    let r = p + q;
    let mut out = DVector::zeros(complex.count(r));
    if r > n {
        return out;
    }
    let scale = factorial(p) * factorial(q) * factorial(r);
    for top in complex.simplices(n) {
        let local = Local::new(geometry, top);
        let fa = local_faces(complex, top, p);
        let fb = local_faces(complex, top, q);
        let fc = local_faces(complex, top, r);
        for (c, gc) in &fc {
            let mut acc = 0.0;
            for (sa, ga) in &fa {
                let va = a[*ga];
                if va == 0.0 {
                    continue;
                }
                for (sb, gb) in &fb {
                    let vb = b[*gb];
                    if vb == 0.0 {
                        continue;
                    }
                    let mut e = 0.0;
                    for i in 0..=p {
                        for j in 0..=q {
                            let mut rows = without(sa, i);
                            rows.extend(without(sb, j));
                            for k in 0..=r {
                                e += sign(i + j + k)
                                    * local.monomial(&[sa[i], sb[j], c[k]])
                                    * local.gram_det(&rows, &without(c, k));
                            }
                        }
                    }
                    acc += va * vb * e;
                }
            }
            out[*gc] += scale * acc;
        }
    }
    out
}
