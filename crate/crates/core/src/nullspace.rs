//! Exact kernels of sparse rational matrices.
//!
//! Rows are cleared to primitive integer vectors and eliminated fraction-free
//! (`r ← a·r − b·p`), dividing every updated row by its content so coefficient
//! growth stays bounded. Among the rows that can serve as pivot for a column the
//! sparsest is chosen, which keeps fill-in low on lattice generators.

use num::{BigInt, Integer, One, Signed, Zero};

use crate::scalar::Rational;
use crate::sparse::SparseMat;

type IntRow = Vec<(usize, BigInt)>;

/// Basis of `{v : M v = 0}`; each vector is scaled to coprime integer entries.
/// Returns an empty list when the kernel is trivial.
pub fn exact_nullspace(m: &SparseMat<Rational>) -> Vec<Vec<Rational>> {
    let ncols = m.cols();
    let mut remaining: Vec<IntRow> = (0..m.rows())
        .map(|i| primitive_row(m.row(i)))
        .filter(|r| !r.is_empty())
        .collect();
    let mut pivots: Vec<(usize, IntRow)> = Vec::new();
    let mut free = Vec::new();

    for col in 0..ncols {
        let choice = remaining
            .iter()
            .enumerate()
            .filter(|(_, r)| coeff(r, col).is_some())
            .min_by_key(|(_, r)| r.len())
            .map(|(i, _)| i);
        let Some(idx) = choice else {
            free.push(col);
            continue;
        };
        let prow = remaining.swap_remove(idx);
        let a = coeff(&prow, col).cloned().expect("pivot present");
        for r in remaining.iter_mut() {
            if let Some(b) = coeff(r, col).cloned() {
                *r = eliminate(r, &prow, &a, &b);
            }
        }
        remaining.retain(|r| !r.is_empty());
        pivots.push((col, prow));
    }

    free.iter()
        .map(|&f| {
            let mut x: Vec<Rational> = vec![Rational::zero(); ncols];
            x[f] = Rational::one();
            for (col, row) in pivots.iter().rev() {
                let mut acc = Rational::zero();
                let mut lead = None;
                for (j, v) in row {
                    if j == col {
                        lead = Some(v);
                    } else if !x[*j].is_zero() {
                        acc += Rational::from_integer(v.clone()) * &x[*j];
                    }
                }
                let lead = lead.expect("pivot row keeps its pivot");
                x[*col] = -acc / Rational::from_integer(lead.clone());
            }
            to_primitive(x)
        })
        .collect()
}

fn coeff(row: &IntRow, col: usize) -> Option<&BigInt> {
    row.binary_search_by_key(&col, |(j, _)| *j).ok().map(|k| &row[k].1)
}

fn primitive_row(row: &[(usize, Rational)]) -> IntRow {
    let lcm = row.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
    let ints: IntRow = row
        .iter()
        .map(|(j, v)| (*j, v.numer() * (&lcm / v.denom())))
        .collect();
    divide_content(ints)
}

fn divide_content(mut row: IntRow) -> IntRow {
    let g = row.iter().fold(BigInt::zero(), |acc, (_, v)| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
    row
}

/// `a·r − b·p` with both rows sorted by column; the result drops the eliminated column.
fn eliminate(r: &IntRow, p: &IntRow, a: &BigInt, b: &BigInt) -> IntRow {
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut i, mut k) = (0, 0);
    while i < r.len() || k < p.len() {
        let (j, v) = match (r.get(i), p.get(k)) {
            (Some((jr, vr)), Some((jp, vp))) if jr == jp => {
                i += 1;
                k += 1;
                (*jr, a * vr - b * vp)
            }
            (Some((jr, vr)), Some((jp, _))) if jr < jp => {
                i += 1;
                (*jr, a * vr)
            }
            (Some((jr, vr)), None) => {
                i += 1;
                (*jr, a * vr)
            }
            (_, Some((jp, vp))) => {
                k += 1;
                (*jp, -(b * vp))
            }
            (None, None) => unreachable!(),
        };
        if !v.is_zero() {
            out.push((j, v));
        }
    }
    divide_content(out)
}

fn to_primitive(x: Vec<Rational>) -> Vec<Rational> {
    let lcm = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = x.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let mut sign = BigInt::one();
    if let Some(first) = ints.iter().find(|v| !v.is_zero()) {
        if first.is_negative() {
            sign = -sign;
        }
    }
    ints.into_iter()
        .map(|v| Rational::from_integer(if g.is_zero() { v } else { v / &g * &sign }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Mat;
    use crate::scalar::{int, rat};

    fn sp(rows: &[&[i64]]) -> SparseMat<Rational> {
        SparseMat::from_dense(&Mat::from_ints(rows))
    }

    #[test]
    fn two_state_balance() {
        let k = exact_nullspace(&sp(&[&[-1, 1], &[1, -1]]));
        assert_eq!(k, vec![vec![int(1), int(1)]]);
    }

    #[test]
    fn identity_has_trivial_kernel() {
        assert!(exact_nullspace(&sp(&[&[1, 0], &[0, 1]])).is_empty());
    }

    #[test]
    fn tasep_two_sites() {
        // B₁ + w₁₂ + B̄₂ for α = β = 1, assembled by hand
        let m = sp(&[&[-1, 1, 0, 0], &[0, -2, 1, 0], &[1, 0, -1, 1], &[0, 1, 0, -1]]);
        let k = exact_nullspace(&m);
        assert_eq!(k, vec![vec![int(1), int(1), int(2), int(1)]]);
    }

    #[test]
    fn rational_entries_and_rank_deficiency() {
        let m = SparseMat::from_dense(&Mat::from_rows(vec![
            vec![rat(1, 2), rat(1, 3), int(0), int(1)],
            vec![int(1), rat(2, 3), int(0), int(2)],
        ]));
        let k = exact_nullspace(&m);
        assert_eq!(k.len(), 3);
        for v in &k {
            assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let k = exact_nullspace(&SparseMat::<Rational>::zeros(3, 3));
        assert_eq!(k.len(), 3);
    }
}
