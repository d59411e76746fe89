//! Exact Betti numbers from integer incidence ranks over the rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{Incidence, SimplicialComplex};

type SparseRow = BTreeMap<usize, BigRational>;

/// Rank of an incidence matrix by exact sparse elimination.
pub fn exact_rank(inc: &Incidence) -> usize {
    let mut pivots: BTreeMap<usize, SparseRow> = BTreeMap::new();
    for i in 0..inc.nrows() {
        let mut row: SparseRow = inc
            .row(i)
            .iter()
            .map(|&(j, s)| (j, BigRational::from_integer(BigInt::from(s))))
            .collect();
        while let Some((&lead, coeff)) = row.iter().next() {
            let Some(p) = pivots.get(&lead) else {
                break;
            };
            let factor = coeff / &p[&lead];
            for (j, v) in p {
                let entry = row.entry(*j).or_insert_with(BigRational::zero);
                *entry -= &factor * v;
                if entry.is_zero() {
                    row.remove(j);
                }
            }
        }
        if let Some(&lead) = row.keys().next() {
            debug_assert!(!row[&lead].abs().is_zero());
            pivots.insert(lead, row);
        }
    }
    pivots.len()
}

fn betti_from(counts: &[usize], ranks: &[usize]) -> Vec<usize> {
    (0..counts.len())
        .map(|p| {
            let out = ranks.get(p).copied().unwrap_or(0);
            let inc = if p == 0 { 0 } else { ranks[p - 1] };
            counts[p] - out - inc
        })
        .collect()
}

/// Absolute Betti numbers b_p(M), p = 0..=dim.
pub fn betti_numbers(c: &SimplicialComplex) -> Vec<usize> {
    let counts: Vec<usize> = (0..=c.dim()).map(|p| c.count(p)).collect();
    let ranks: Vec<usize> = (0..c.dim()).map(|p| exact_rank(c.incidence(p))).collect();
    betti_from(&counts, &ranks)
}

/// Relative Betti numbers b_p(M, ∂M) from the interior cochain complex.
pub fn relative_betti_numbers(c: &SimplicialComplex) -> Vec<usize> {
    let interior: Vec<Vec<usize>> = (0..=c.dim()).map(|p| c.interior_indices(p)).collect();
    let counts: Vec<usize> = interior.iter().map(Vec::len).collect();
    let ranks: Vec<usize> = (0..c.dim())
        .map(|p| exact_rank(&c.incidence(p).restrict(&interior[p + 1], &interior[p])))
        .collect();
    betti_from(&counts, &ranks)
}
