//! Operators on `(C²)^{⊗n}`.
//!
//! Configuration index convention: site 0 (the first tensor factor) is the most
//! significant bit, so `e⁰⊗…⊗e⁰` is index 0 and the occupation of site `k` in
//! state `s` is `(s >> (n-1-k)) & 1`.

use crate::matrix::Mat;
use crate::scalar::Field;
use crate::sparse::SparseMat;
use crate::CoreError;

/// Which tensor factor of a two-site operator to act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leg {
    First,
    Second,
}

pub fn occupation(state: usize, site: usize, n: usize) -> usize {
    (state >> (n - 1 - site)) & 1
}

/// The swap `P(u⊗v) = v⊗u` on `C²⊗C²`.
pub fn permutation_op<S: Field>() -> Mat<S> {
    Mat::from_ints(&[&[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 1, 0, 0], &[0, 0, 0, 1]])
}

/// Conjugation by the swap, `R₂₁ = P R₁₂ P`.
pub fn swap_legs<S: Field>(m: &Mat<S>) -> Result<Mat<S>, CoreError> {
    check_shape(m, 4, "swap_legs")?;
    Ok(Mat::from_fn(4, 4, |r, c| m.get(swap_index(r), swap_index(c)).clone()))
}

fn swap_index(i: usize) -> usize {
    ((i & 1) << 1) | (i >> 1)
}

/// Transposes the indices of one tensor leg of a 4×4 operator.
pub fn partial_transpose<S: Field>(m: &Mat<S>, leg: Leg) -> Result<Mat<S>, CoreError> {
    check_shape(m, 4, "partial_transpose")?;
    Ok(Mat::from_fn(4, 4, |r, c| {
        let (r1, r2, c1, c2) = (r >> 1, r & 1, c >> 1, c & 1);
        let (r1, r2, c1, c2) = match leg {
            Leg::First => (c1, r2, r1, c2),
            Leg::Second => (r1, c2, c1, r2),
        };
        m.get(2 * r1 + r2, 2 * c1 + c2).clone()
    }))
}

/// `(tr₀ M)[j,l] = Σ_i M[(i,j),(i,l)]` for `M` acting on `C² ⊗ C^d`.
pub fn partial_trace_first<S: Field>(m: &Mat<S>) -> Result<Mat<S>, CoreError> {
    if !m.is_square() || m.rows() % 2 != 0 {
        return Err(CoreError::Dimension(format!(
            "partial trace needs an even square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let d = m.rows() / 2;
    Ok(Mat::from_fn(d, d, |j, l| m.get(j, l).clone() + m.get(d + j, d + l).clone()))
}

/// Sparse partial trace over the first tensor factor.
pub fn partial_trace_first_sparse<S: Field>(m: &SparseMat<S>) -> Result<SparseMat<S>, CoreError> {
    if m.rows() != m.cols() || m.rows() % 2 != 0 {
        return Err(CoreError::Dimension(format!(
            "partial trace needs an even square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let d = m.rows() / 2;
    let entries = m.triplets().filter_map(|(i, j, v)| {
        let same_block = (i < d) == (j < d);
        same_block.then(|| (i % d, j % d, v.clone()))
    });
    SparseMat::from_triplets(d, d, entries)
}

/// Embeds a `2^k × 2^k` operator acting on the listed sites (0-based, in the
/// operator's own factor order) into `(C²)^{⊗n}`, identity elsewhere.
pub fn embed_sites<S: Field>(op: &Mat<S>, sites: &[usize], n: usize) -> Result<SparseMat<S>, CoreError> {
    let k = sites.len();
    if op.rows() != 1 << k || op.cols() != 1 << k {
        return Err(CoreError::Dimension(format!(
            "operator is {}x{} but acts on {} sites",
            op.rows(),
            op.cols(),
            k
        )));
    }
    for (a, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(CoreError::SiteOutOfRange { site: s, len: n });
        }
        if sites[..a].contains(&s) {
            return Err(CoreError::Dimension(format!("site {s} listed twice")));
        }
    }
    let masks: Vec<usize> = sites.iter().map(|&s| 1 << (n - 1 - s)).collect();
    let local = |state: usize| {
        masks.iter().fold(0, |acc, m| (acc << 1) | usize::from(state & m != 0))
    };
    let place = |base: usize, r: usize| {
        masks.iter().enumerate().fold(base, |acc, (a, m)| {
            if (r >> (k - 1 - a)) & 1 == 1 {
                acc | m
            } else {
                acc
            }
        })
    };
    let all_mask: usize = masks.iter().sum();
    let dim = 1usize << n;
    let mut triplets = Vec::new();
    for state in 0..dim {
        let c = local(state);
        let base = state & !all_mask;
        for r in 0..op.rows() {
            let v = op.get(r, c);
            if !v.is_zero() {
                triplets.push((place(base, r), state, v.clone()));
            }
        }
    }
    SparseMat::from_triplets(dim, dim, triplets)
}

/// Embeds a single-site (2×2) or adjacent-pair (4×4) operator starting at the
/// 1-based `first_site` of a chain of `len` sites.
pub fn embed_local<S: Field>(op: &Mat<S>, first_site: usize, len: usize) -> Result<SparseMat<S>, CoreError> {
    let width = match (op.rows(), op.cols()) {
        (2, 2) => 1,
        (4, 4) => 2,
        (r, c) => return Err(CoreError::Dimension(format!("local operator must be 2x2 or 4x4, got {r}x{c}"))),
    };
    if first_site == 0 || first_site + width - 1 > len {
        return Err(CoreError::SiteOutOfRange { site: first_site, len });
    }
    let sites: Vec<usize> = (first_site - 1..first_site - 1 + width).collect();
    embed_sites(op, &sites, len)
}

/// Embeds a two-site operator on an arbitrary (possibly non-adjacent, possibly
/// reversed) ordered pair of sites.
pub fn embed_pair<S: Field>(op: &Mat<S>, a: usize, b: usize, n: usize) -> Result<SparseMat<S>, CoreError> {
    embed_sites(op, &[a, b], n)
}

fn check_shape<S>(m: &Mat<S>, n: usize, what: &str) -> Result<(), CoreError> {
    if m.rows() != n || m.cols() != n {
        return Err(CoreError::Dimension(format!("{what} expects {n}x{n}, got {}x{}", m.rows(), m.cols())));
    }
    Ok(())
}
