//! Matrix product representations of stationary states.
//!
//! Contains the TASEP quadratic algebra, the three-generator algebra of the
//! reaction–diffusion model with its truncated tensor representation, the
//! monodromy realization of the Zamolodchikov–Faddeev relation, and the
//! closed-form RD observables.

use std::collections::BTreeMap;

use exclusion_core::{
    abs, embed_pair, from_f64, int, occupation, rat, rel_close_f64, to_f64, Dual, Field, Mat, Rational, SparseMat,
};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::markov::Distribution;
use crate::models::{BoundaryKind, Model, ModelKind};
use crate::transfer::{build_transfer, TransferSpec};
use crate::verifier::{CheckReport, Status, Witness};

/// Truncation used by the exact RD relation checks.
pub const RD_CHECK_TRUNCATION: usize = 8;
/// Largest truncation tried by the convergence loop.
pub const DEFAULT_TRUNCATION_CAP: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct MPRepresentation<S = Rational> {
    pub letters: BTreeMap<String, SparseMat<S>>,
    pub w: Vec<S>,
    pub v: Vec<S>,
    /// Longest word whose contraction is unaffected by truncation; `None` for approximate representations.
    pub exact_up_to: Option<usize>,
}

fn dot<S: Field>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

impl<S: Field> MPRepresentation<S> {
    pub fn new(
        letters: BTreeMap<String, SparseMat<S>>,
        w: Vec<S>,
        v: Vec<S>,
        exact_up_to: Option<usize>,
    ) -> Result<Self> {
        let n = w.len();
        if v.len() != n {
            return Err(Error::Internal(format!("boundary vectors of lengths {n} and {}", v.len())));
        }
        if let Some((name, m)) = letters.iter().find(|(_, m)| m.rows() != n || m.cols() != n) {
            return Err(Error::Internal(format!("letter {name} is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
        }
        if dot(&w, &v).is_zero() {
            return Err(Error::ZeroNormalization("⟨W|V⟩".into()));
        }
        Ok(MPRepresentation { letters, w, v, exact_up_to })
    }

    pub fn size(&self) -> usize {
        self.w.len()
    }

    pub fn letter(&self, name: &str) -> Result<&SparseMat<S>> {
        self.letters.get(name).ok_or_else(|| Error::Internal(format!("representation has no letter {name}")))
    }

    /// `⟨W|X₁⋯X_k`.
    pub fn left_word(&self, word: &[&SparseMat<S>]) -> Vec<S> {
        word.iter().fold(self.w.clone(), |row, m| m.vec_mul(&row))
    }

    /// `⟨W|X₁⋯X_k|V⟩`.
    pub fn contract(&self, word: &[&SparseMat<S>]) -> S {
        dot(&self.left_word(word), &self.v)
    }

    pub fn word(&self, names: &[&str]) -> Result<S> {
        let ms = names.iter().map(|n| self.letter(n)).collect::<Result<Vec<_>>>()?;
        Ok(self.contract(&ms))
    }

    /// `⟨W|Π_i X_i^{τ_i}|V⟩` for every configuration, site 1 most significant.
    pub fn contract_configurations(&self, sites: &[[SparseMat<S>; 2]]) -> Vec<S> {
        let l = sites.len();
        (0..1usize << l)
            .into_par_iter()
            .map(|idx| {
                let row = sites
                    .iter()
                    .enumerate()
                    .fold(self.w.clone(), |row, (s, pair)| pair[occupation(idx, s, l)].vec_mul(&row));
                dot(&row, &self.v)
            })
            .collect()
    }
}

/// Stationary weights `⟨W|Π((1−τ_i)E + τ_i D)|V⟩`, normalized.
pub fn steady_from_ansatz<S: Field>(rep: &MPRepresentation<S>, l: usize) -> Result<Distribution<S>> {
    if l == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    if let Some(k) = rep.exact_up_to {
        if k < l {
            return Err(Error::InvalidParameter(format!(
                "truncation {} is exact only up to words of length {k}, need {l}",
                rep.size()
            )));
        }
    }
    let pair = [rep.letter("E")?.clone(), rep.letter("D")?.clone()];
    let sites = vec![pair; l];
    Distribution::new(l, rep.contract_configurations(&sites))
}

fn positive(x: &Rational, what: &str) -> Result<()> {
    if x <= &int(0) {
        return Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")));
    }
    Ok(())
}

/// Bidiagonal representation of `DE = D + E`, `⟨W|E = ⟨W|/α`, `D|V⟩ = |V⟩/β`
/// with `⟨W| = ⟨0|` and `|V⟩ = |0⟩`.
pub fn tasep_representation(alpha: &Rational, beta: &Rational, n: usize) -> Result<MPRepresentation> {
    positive(alpha, "α")?;
    positive(beta, "β")?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("truncation must be at least 2, got {n}")));
    }
    let one = int(1);
    let mut d = vec![(0, 0, beta.recip()), (0, 1, one.clone())];
    let mut e = vec![(0, 0, alpha.recip()), (1, 0, (alpha + beta - &one) / (alpha * beta))];
    for i in 1..n {
        d.push((i, i, one.clone()));
        e.push((i, i, one.clone()));
        if i + 1 < n {
            d.push((i, i + 1, one.clone()));
            e.push((i + 1, i, one.clone()));
        }
    }
    let mut letters = BTreeMap::new();
    letters.insert("D".to_string(), SparseMat::from_triplets(n, n, d)?);
    letters.insert("E".to_string(), SparseMat::from_triplets(n, n, e)?);
    let mut unit = vec![int(0); n];
    unit[0] = int(1);
    MPRepresentation::new(letters, unit.clone(), unit, Some(n - 1))
}

/// `DE = D + E` on the leading block and both boundary relations.
pub fn check_tasep_relations(alpha: &Rational, beta: &Rational, n: usize) -> Vec<CheckReport> {
    let points = vec![format!("alpha={alpha}"), format!("beta={beta}"), format!("N={n}")];
    let rep = match tasep_representation(alpha, beta, n) {
        Ok(r) => r,
        Err(e) => return vec![CheckReport::new("tasep", "tasep.representation", points, Status::fail(e.to_string()))],
    };
    let d = rep.letter("D").expect("D").clone();
    let e = rep.letter("E").expect("E").clone();
    let bulk = compare_block(&d.matmul(&e), &d.add(&e), n - 1);
    let left = compare_prefix(&e.vec_mul(&rep.w).iter().map(|x| x * alpha).collect::<Vec<_>>(), &rep.w, n - 1);
    let right = compare_prefix(&d.mul_vec(&rep.v).iter().map(|x| x * beta).collect::<Vec<_>>(), &rep.v, n - 1);
    vec![
        CheckReport::new("tasep", "tasep.bulk", points.clone(), bulk),
        CheckReport::new("tasep", "tasep.boundary_w", points.clone(), left),
        CheckReport::new("tasep", "tasep.boundary_v", points, right),
    ]
}

fn compare_block<S: Field>(lhs: &SparseMat<S>, rhs: &SparseMat<S>, k: usize) -> Status {
    first_difference(lhs, rhs, |r, c| r < k && c < k)
}

fn compare_prefix<S: Field>(lhs: &[S], rhs: &[S], k: usize) -> Status {
    first_vec_difference(lhs, rhs, |i| i < k)
}

fn first_difference<S: Field>(lhs: &SparseMat<S>, rhs: &SparseMat<S>, keep: impl Fn(usize, usize) -> bool) -> Status {
    let diff = lhs.sub(rhs);
    let hit = diff.triplets().map(|(r, c, _)| (r, c)).find(|(r, c)| keep(*r, *c));
    match hit {
        None => Status::Pass,
        Some((r, c)) => Status::Fail {
            witness: Some(Witness { row: r, col: c, lhs: lhs.get(r, c).to_string(), rhs: rhs.get(r, c).to_string() }),
            message: "entries differ".into(),
        },
    }
}

fn first_vec_difference<S: Field>(lhs: &[S], rhs: &[S], keep: impl Fn(usize) -> bool) -> Status {
    match (0..lhs.len()).find(|&i| keep(i) && !(lhs[i].clone() - rhs[i].clone()).is_zero()) {
        None => Status::Pass,
        Some(i) => Status::Fail {
            witness: Some(Witness { row: i, col: 0, lhs: lhs[i].to_string(), rhs: rhs[i].to_string() }),
            message: "components differ".into(),
        },
    }
}

/// Both tensor indices of `idx` lie further than `k` from the truncation edge.
fn interior(idx: usize, n: usize, k: usize) -> bool {
    let (a, b) = (idx / n, idx % n);
    a + k + 1 < n && b + k + 1 < n
}

fn compare_interior<S: Field>(lhs: &SparseMat<S>, rhs: &SparseMat<S>, n: usize, k: usize) -> Status {
    first_difference(lhs, rhs, |r, c| interior(r, n, k) && interior(c, n, k))
}

fn compare_interior_vec<S: Field>(lhs: &[S], rhs: &[S], n: usize, k: usize) -> Status {
    first_vec_difference(lhs, rhs, |i| interior(i, n, k))
}

fn first_failure(statuses: impl IntoIterator<Item = Status>) -> Status {
    let mut skipped = None;
    for s in statuses {
        match s {
            Status::Fail { .. } => return s,
            Status::Skipped(_) if skipped.is_none() => skipped = Some(s),
            _ => {}
        }
    }
    skipped.unwrap_or(Status::Pass)
}

/// Boundary constants of the RD algebra:
/// `⟨W|(G₁ − cG₂ − aG₃) = 0`, `(G₃ − bG₁ − dG₂)|V⟩ = 0`, and `φ = (κ−1)/(κ+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RdConstants {
    pub phi: Rational,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl RdConstants {
    pub fn new(model: &Model) -> Result<Self> {
        if model.kind() != ModelKind::Rd {
            return Err(Error::unsupported("the three-generator algebra", model.name()));
        }
        let k = model.kappa();
        let r = model.rates();
        let two_k = int(2) * k;
        let left = &two_k + &r.alpha + &r.gamma;
        let right = &two_k + &r.delta + &r.beta;
        if Field::is_zero(&left) || Field::is_zero(&right) {
            return Err(Error::Pole("2κ + α + γ or 2κ + δ + β".into()));
        }
        Ok(RdConstants {
            phi: (k - int(1)) / (k + int(1)),
            a: (&two_k - &r.alpha - &r.gamma) / &left,
            c: (&r.gamma - &r.alpha) / &left,
            b: (&two_k - &r.delta - &r.beta) / &right,
            d: (&r.beta - &r.delta) / &right,
        })
    }

    /// Constants after `κ → −κ`: `φ → 1/φ`, `a → 1/a`, `b → 1/b`, `c → −c/a`, `d → −d/b`.
    pub fn mirrored(&self) -> Result<Self> {
        let inv = |x: &Rational, what: &str| x.try_inv().ok_or_else(|| Error::Pole(what.to_string()));
        let ia = inv(&self.a, "a")?;
        let ib = inv(&self.b, "b")?;
        Ok(RdConstants {
            phi: inv(&self.phi, "φ")?,
            c: -(&self.c * &ia),
            d: -(&self.d * &ib),
            a: ia,
            b: ib,
        })
    }

    /// Requirements for the boundary vectors to define convergent sums for words of length `l`.
    pub fn check_convergence(&self, l: usize) -> Result<()> {
        if abs(&self.phi) >= int(1) {
            return Err(Error::InvalidParameter(format!(
                "|φ| = |{}| ≥ 1: the boundary vectors diverge; use the equivalent model with κ → −κ",
                self.phi
            )));
        }
        if Field::is_zero(&self.c) || Field::is_zero(&self.d) {
            return Err(Error::InvalidParameter(
                "c = 0 or d = 0 (α = γ or β = δ): the boundary-vector formulas contain negative powers of c and d"
                    .into(),
            ));
        }
        let scale = Field::pow(&self.phi, l as u32) / (int(1) - &self.phi * &self.phi);
        let r1 = abs(&(&self.b * &self.c * &scale / &self.d));
        let r2 = abs(&(&self.a * &self.d * &scale / &self.c));
        if r1 >= int(1) || r2 >= int(1) {
            return Err(Error::InvalidParameter(format!(
                "convergence ratios |bcφ^L/((1−φ²)d)| = {r1} and |adφ^L/((1−φ²)c)| = {r2} must both be below 1"
            )));
        }
        Ok(())
    }
}

fn tri(k: i64) -> u32 {
    (k * (k - 1) / 2) as u32
}

fn ipow(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        Field::pow(x, e as u32)
    } else {
        Field::pow(&x.recip(), (-e) as u32)
    }
}

/// `Π_{k=1..m}(1 − φ^{2k})` for `m < n`.
fn pochhammer(phi: &Rational, n: usize) -> Vec<Rational> {
    let phi2 = phi * phi;
    let mut out = Vec::with_capacity(n);
    let (mut acc, mut p) = (int(1), int(1));
    out.push(acc.clone());
    for _ in 1..n {
        p = &p * &phi2;
        acc = &acc * (int(1) - &p);
        out.push(acc.clone());
    }
    out
}

impl RdConstants {
    /// `w_{n,m} = c^{n−m} a^m φ^{(n−m)(n−m−1)/2} / Π_{k≤m}(1−φ^{2k})`.
    fn w_exact(&self, n: usize, m: usize, poch: &[Rational]) -> Rational {
        let k = n as i64 - m as i64;
        ipow(&self.c, k) * Field::pow(&self.a, m as u32) * Field::pow(&self.phi, tri(k)) / &poch[m]
    }

    /// `v_{n,m} = d^{m−n} b^n φ^{(m−n)(m−n−1)/2} / Π_{k≤n}(1−φ^{2k})`.
    fn v_exact(&self, n: usize, m: usize, poch: &[Rational]) -> Rational {
        let k = m as i64 - n as i64;
        ipow(&self.d, k) * Field::pow(&self.b, n as u32) * Field::pow(&self.phi, tri(k)) / &poch[n]
    }
}

/// `s·|x|^e` accumulated in log space so huge and tiny factors cancel without overflow.
struct LogTerm {
    sign: f64,
    log: f64,
    zero: bool,
}

impl LogTerm {
    fn one() -> Self {
        LogTerm { sign: 1.0, log: 0.0, zero: false }
    }

    fn times(mut self, x: f64, e: i64) -> Self {
        if e == 0 {
            return self;
        }
        if x == 0.0 {
            self.zero = true;
            return self;
        }
        if x < 0.0 && e % 2 != 0 {
            self.sign = -self.sign;
        }
        self.log += e as f64 * x.abs().ln();
        self
    }

    fn value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.sign * self.log.exp()
        }
    }
}

fn rd_letters<S: Field>(phi: &S, n: usize) -> Result<BTreeMap<String, SparseMat<S>>> {
    let id = |i: usize, j: usize| i * n + j;
    let mut g1 = Vec::new();
    let mut g2 = Vec::new();
    let mut g3 = Vec::new();
    let powers: Vec<S> = (0..2 * n).scan(S::one(), |p, _| {
        let cur = p.clone();
        *p = p.clone() * phi.clone();
        Some(cur)
    })
    .collect();
    for i in 0..n {
        for j in 0..n {
            g2.push((id(i, j), id(i, j), powers[i + j].clone()));
            if i + 1 < n {
                g1.push((id(i + 1, j), id(i, j), S::one()));
            }
            if j >= 1 {
                g3.push((id(i, j - 1), id(i, j), S::one()));
            }
        }
    }
    let dim = n * n;
    let g1 = SparseMat::from_triplets(dim, dim, g1)?;
    let g2 = SparseMat::from_triplets(dim, dim, g2)?;
    let g3 = SparseMat::from_triplets(dim, dim, g3)?;
    let e = g2.add(&g1).add(&g3);
    let d = g2.sub(&g1).sub(&g3);
    let mut letters = BTreeMap::new();
    for (name, m) in [("G1", g1), ("G2", g2), ("G3", g3), ("E", e), ("D", d)] {
        letters.insert(name.to_string(), m);
    }
    Ok(letters)
}

fn rd_checked(model: &Model, n: usize) -> Result<RdConstants> {
    let k = RdConstants::new(model)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("truncation must be at least 2, got {n}")));
    }
    if abs(&k.phi) >= int(1) || Field::is_zero(&k.c) || Field::is_zero(&k.d) {
        k.check_convergence(0)?;
    }
    Ok(k)
}

/// Exact truncation of `G₁ = g₁⊗1`, `G₂ = g₂⊗g₂`, `G₃ = 1⊗g₃` on `N²` states,
/// basis index `n·N + m`.
pub fn rd_representation_exact(model: &Model, n: usize) -> Result<MPRepresentation<Rational>> {
    let k = rd_checked(model, n)?;
    let poch = pochhammer(&k.phi, n);
    let mut w = Vec::with_capacity(n * n);
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            w.push(k.w_exact(i, j, &poch));
            v.push(k.v_exact(i, j, &poch));
        }
    }
    MPRepresentation::new(rd_letters(&k.phi, n)?, w, v, None)
}

/// Floating-point version of [`rd_representation_exact`] for large truncations.
pub fn rd_representation(model: &Model, n: usize) -> Result<MPRepresentation<f64>> {
    let k = rd_checked(model, n)?;
    let (phi, a, b, c, d) = (to_f64(&k.phi), to_f64(&k.a), to_f64(&k.b), to_f64(&k.c), to_f64(&k.d));
    let mut log_poch = vec![0.0; n];
    for m in 1..n {
        log_poch[m] = log_poch[m - 1] + (1.0 - phi.powi(2 * m as i32)).ln();
    }
    let mut w = Vec::with_capacity(n * n);
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let kw = i as i64 - j as i64;
            let mut t = LogTerm::one().times(c, kw).times(a, j as i64).times(phi, tri(kw) as i64);
            t.log -= log_poch[j];
            w.push(t.value());
            let kv = -kw;
            let mut t = LogTerm::one().times(d, kv).times(b, i as i64).times(phi, tri(kv) as i64);
            t.log -= log_poch[i];
            v.push(t.value());
        }
    }
    MPRepresentation::new(rd_letters(&phi, n)?, w, v, None)
}

/// Doubles the truncation from `L + 4` until every component and the total agree to relative `1e−12`.
fn converge(l: usize, cap: usize, f: impl Fn(usize) -> Result<Vec<f64>>) -> Result<(Vec<f64>, usize)> {
    let tol = rat(1, 1_000_000_000_000);
    let mut n = (l + 4).min(cap);
    let mut prev = f(n)?;
    loop {
        if n >= cap {
            return Err(Error::NoConvergence(format!(
                "no agreement up to N = {cap}; last total {:e}",
                prev.iter().sum::<f64>()
            )));
        }
        let next = (2 * n).min(cap);
        let cur = f(next)?;
        let total = |v: &[f64]| v.iter().sum::<f64>();
        let agree = prev.iter().zip(&cur).all(|(a, b)| rel_close_f64(*a, *b, &tol))
            && rel_close_f64(total(&prev), total(&cur), &tol);
        if agree {
            return Ok((cur, next));
        }
        log::debug!("truncation {n} -> {next}: totals {:e} vs {:e}", total(&prev), total(&cur));
        prev = cur;
        n = next;
    }
}

/// RD stationary state from the truncated representation, with the truncation that converged.
pub fn rd_steady_converged(model: &Model, l: usize, cap: usize) -> Result<(Distribution<f64>, usize)> {
    if l == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    RdConstants::new(model)?.check_convergence(l)?;
    let (weights, n) = converge(l, cap, |n| {
        let rep = rd_representation(model, n)?;
        Ok(steady_from_ansatz(&rep, l)?.weights)
    })?;
    Ok((Distribution::new(l, weights)?, n))
}

/// `A(x) = (G₁x + G₂ + G₃/x, −G₁x + G₂ − G₃/x)`.
pub fn rd_a<S: Field>(rep: &MPRepresentation<S>, x: &S) -> Result<[SparseMat<S>; 2]> {
    let inv = x.try_inv().ok_or_else(|| Error::InvalidParameter("A(x) needs x ≠ 0".into()))?;
    let g1 = rep.letter("G1")?.scale(x);
    let g2 = rep.letter("G2")?;
    let g3 = rep.letter("G3")?.scale(&inv);
    Ok([g2.add(&g1).add(&g3), g2.sub(&g1).sub(&g3)])
}

/// `A′(1) = (G₁ − G₃, −G₁ + G₃)`.
pub fn rd_a_prime<S: Field>(rep: &MPRepresentation<S>) -> Result<[SparseMat<S>; 2]> {
    let d = rep.letter("G1")?.sub(rep.letter("G3")?);
    Ok([d.clone(), d.scale(&-S::one())])
}

/// `⟨W|A_{τ₁}(θ₁)⋯A_{τ_L}(θ_L)|V⟩` for all configurations.
pub fn inhomogeneous_state<S: Field>(rep: &MPRepresentation<S>, thetas: &[S]) -> Result<Vec<S>> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter("need at least one inhomogeneity".into()));
    }
    let sites = thetas.iter().map(|t| rd_a(rep, t)).collect::<Result<Vec<_>>>()?;
    Ok(rep.contract_configurations(&sites))
}

/// [`inhomogeneous_state`] over the convergence loop; returns the state and the truncation.
pub fn rd_inhomogeneous_converged(model: &Model, thetas: &[Rational], cap: usize) -> Result<(Vec<f64>, usize)> {
    let k = RdConstants::new(model)?;
    k.check_convergence(thetas.len())?;
    if thetas.iter().any(Field::is_zero) {
        return Err(Error::InvalidParameter("inhomogeneities must be nonzero".into()));
    }
    let th: Vec<f64> = thetas.iter().map(to_f64).collect();
    converge(thetas.len(), cap, |n| inhomogeneous_state(&rd_representation(model, n)?, &th))
}

/// Relative residual `max|t S − S| / max|S|`.
fn eigen_residual(t: &SparseMat<f64>, s: &[f64]) -> f64 {
    let ts = t.mul_vec(s);
    let scale = s.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    ts.iter().zip(s).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

/// `t(θ_i)|S(θ)⟩ = |S(θ)⟩` and `t(1/θ_i)|S(θ)⟩ = |S(θ)⟩` for the RD model, to relative `tol`.
pub fn check_inhomogeneous_eigenvector(model: &Model, thetas: &[Rational], cap: usize, tol: f64) -> Vec<CheckReport> {
    let base: Vec<String> = thetas.iter().map(|t| format!("theta={t}")).collect();
    let state = match rd_inhomogeneous_converged(model, thetas, cap) {
        Ok(s) => s,
        Err(e) => {
            return vec![CheckReport::run(model.name(), "inhomogeneous.eigenvalue_one", base, || Err(e))];
        }
    };
    let (s, n) = state;
    let spec = TransferSpec::inhomogeneous(model.clone(), thetas.to_vec());
    let mut xs = Vec::new();
    for t in thetas {
        xs.push(t.clone());
        if let Some(inv) = t.try_inv() {
            if &inv != t {
                xs.push(inv);
            }
        }
    }
    xs.iter()
        .map(|x| {
            let mut points = base.clone();
            points.push(format!("x={x}"));
            let mut residual = None;
            let report = CheckReport::run(model.name(), "inhomogeneous.eigenvalue_one", points, || {
                let t = build_transfer::<f64>(&spec, &to_f64(x))?;
                let r = eigen_residual(&t, &s);
                residual = Some(r);
                Ok(if r <= tol {
                    Status::Pass
                } else {
                    Status::fail(format!("relative residual {r:e} exceeds {tol:e}"))
                })
            });
            match residual {
                Some(r) => report.with_detail(format!("residual={r:e} N={n}")),
                None => report,
            }
        })
        .collect()
}

/// Exchange relations and boundary recursions of the RD algebra, exactly on interior indices.
pub fn check_rd_relations(model: &Model, n: usize) -> Vec<CheckReport> {
    let points = vec![format!("N={n}")];
    let name = model.name();
    let built = rd_representation_exact(model, n).and_then(|rep| Ok((RdConstants::new(model)?, rep)));
    let (k, rep) = match built {
        Ok(v) => v,
        Err(e) => return vec![CheckReport::run(name, "rd.representation", points, || Err(e))],
    };
    let g = |s: &str| rep.letter(s).expect("RD letter").clone();
    let (g1, g2, g3) = (g("G1"), g("G2"), g("G3"));
    let phi = &k.phi;
    let rel = |check: &str, lhs: SparseMat<Rational>, rhs: SparseMat<Rational>| {
        CheckReport::new(name, check, points.clone(), compare_interior(&lhs, &rhs, n, 2))
    };
    let mut out = vec![
        rel("rd.exchange_12", g1.matmul(&g2).scale(phi), g2.matmul(&g1)),
        rel("rd.exchange_13", g1.matmul(&g3), g3.matmul(&g1)),
        rel("rd.exchange_23", g2.matmul(&g3).scale(phi), g3.matmul(&g2)),
    ];
    let left_op = g1.sub(&g2.scale(&k.c)).sub(&g3.scale(&k.a));
    let right_op = g3.sub(&g1.scale(&k.b)).sub(&g2.scale(&k.d));
    let zero = vec![int(0); n * n];
    out.push(CheckReport::new(
        name,
        "rd.boundary_w",
        points.clone(),
        compare_interior_vec(&left_op.vec_mul(&rep.w), &zero, n, 1),
    ));
    out.push(CheckReport::new(
        name,
        "rd.boundary_v",
        points,
        compare_interior_vec(&right_op.mul_vec(&rep.v), &zero, n, 1),
    ));
    out
}

/// Operators `A_i(x₁)A_j(x₂)` indexed `2i + j`.
fn pair_products<S: Field>(a1: &[SparseMat<S>; 2], a2: &[SparseMat<S>; 2]) -> Vec<SparseMat<S>> {
    (0..4).map(|ij| a1[ij / 2].matmul(&a2[ij % 2])).collect()
}

/// `Σ_{kl} m_{(ij),(kl)} z_{kl}`.
fn apply_local<S: Field>(m: &Mat<S>, z: &[SparseMat<S>]) -> Vec<SparseMat<S>> {
    (0..4)
        .map(|ij| {
            (0..4).fold(SparseMat::zeros(z[0].rows(), z[0].cols()), |acc, kl| acc.add(&z[kl].scale(m.get(ij, kl))))
        })
        .collect()
}

/// Swaps the pair index `(i,j) → (j,i)`.
fn swapped<S: Clone>(z: &[S]) -> Vec<S> {
    [0, 2, 1, 3].iter().map(|&k| z[k].clone()).collect()
}

/// How operator identities are compared: exactly, or only on interior truncation indices.
#[derive(Clone, Copy)]
enum Scope {
    Full,
    Interior { n: usize },
}

fn compare_ops<S: Field>(lhs: &[SparseMat<S>], rhs: &[SparseMat<S>], scope: Scope, k: usize) -> Status {
    first_failure(lhs.iter().zip(rhs).map(|(l, r)| match scope {
        Scope::Full => first_difference(l, r, |_, _| true),
        Scope::Interior { n } => compare_interior(l, r, n, k),
    }))
}

/// The ZF relation, its double application, `[C(x₁), C(x₂)] = 0` and the derivative consequence
/// `w A₁(1)A₂(1) = (1/ρ)(A₁(1)A₂′(1) − A₁′(1)A₂(1))`.
fn zf_reports<S: Field>(
    model: &Model,
    points: Vec<String>,
    scope: Scope,
    a: impl Fn(&Rational) -> Result<[SparseMat<S>; 2]>,
    at_identity: Result<([SparseMat<S>; 2], [SparseMat<S>; 2])>,
    x1: &Rational,
    x2: &Rational,
) -> Vec<CheckReport> {
    let name = model.name();
    let conv = model.convention();
    let lift = |m: Mat<Rational>| m.map(S::from_rational);
    let zf = CheckReport::run(name, "zf.relation", points.clone(), || {
        let r = lift(model.r_matrix(&conv.compose(x1, x2)?)?);
        let (a1, a2) = (a(x1)?, a(x2)?);
        let lhs = apply_local(&r, &pair_products(&a1, &a2));
        let rhs = swapped(&pair_products(&a2, &a1));
        Ok(compare_ops(&lhs, &rhs, scope, 2))
    });
    let twice = CheckReport::run(name, "zf.twice", points.clone(), || {
        let r12 = lift(model.r_matrix(&conv.compose(x1, x2)?)?);
        let r21 = lift(model.r_matrix(&conv.compose(x2, x1)?)?);
        let z = pair_products(&a(x1)?, &a(x2)?);
        let once = swapped(&apply_local(&r12, &z));
        let back = swapped(&apply_local(&r21, &once));
        Ok(compare_ops(&back, &z, scope, 2))
    });
    let commute = CheckReport::run(name, "zf.c_commute", points.clone(), || {
        let c = |x: &Rational| -> Result<SparseMat<S>> {
            let [p, q] = a(x)?;
            Ok(p.add(&q))
        };
        let (c1, c2) = (c(x1)?, c(x2)?);
        Ok(compare_ops(&[c1.matmul(&c2)], &[c2.matmul(&c1)], scope, 2))
    });
    let deriv = CheckReport::run(name, "zf.derivative", points, || {
        let (a0, ap) = at_identity?;
        let w = lift(model.local_operators().w);
        let lhs = apply_local(&w, &pair_products(&a0, &a0));
        let inv_rho = S::from_rational(&model.rho().recip());
        let rhs: Vec<SparseMat<S>> = (0..4)
            .map(|ij| {
                let (i, j) = (ij / 2, ij % 2);
                a0[i].matmul(&ap[j]).sub(&ap[i].matmul(&a0[j])).scale(&inv_rho)
            })
            .collect();
        Ok(compare_ops(&lhs, &rhs, scope, 2))
    });
    vec![zf, twice, commute, deriv]
}

/// `T₀(x) = R₀L′(x)⋯R₀1(x)` with auxiliary site 0; returns `A_i(x) = Σ_j T_{ij}(x) v_j(x)`.
pub fn monodromy_a<S: Field>(model: &Model, l_inner: usize, x: &S) -> Result<[SparseMat<S>; 2]> {
    if model.kind() == ModelKind::Rd {
        return Err(Error::unsupported("the monodromy realization", model.name()));
    }
    if l_inner == 0 {
        return Err(Error::InvalidParameter("inner length must be at least 1".into()));
    }
    let n = l_inner + 1;
    let r = model.r_matrix(x)?;
    let mut t = SparseMat::identity(1 << n);
    for j in (1..=l_inner).rev() {
        t = t.matmul(&embed_pair(&r, 0, j, n)?);
    }
    let v = model.markov_vector(x)?;
    let dim = 1 << l_inner;
    let mut blocks: [Vec<(usize, usize, S)>; 2] = [Vec::new(), Vec::new()];
    for (row, col, val) in t.triplets() {
        let (i, j) = (row / dim, col / dim);
        blocks[i].push((row % dim, col % dim, val.clone() * v[j].clone()));
    }
    let [b0, b1] = blocks;
    Ok([SparseMat::from_triplets(dim, dim, b0)?, SparseMat::from_triplets(dim, dim, b1)?])
}

fn split_dual(a: [SparseMat<Dual<Rational>>; 2]) -> ([SparseMat<Rational>; 2], [SparseMat<Rational>; 2]) {
    let value = |m: &SparseMat<Dual<Rational>>| m.map(|d| d.value.clone());
    let deriv = |m: &SparseMat<Dual<Rational>>| m.map(|d| d.deriv.clone());
    ([value(&a[0]), value(&a[1])], [deriv(&a[0]), deriv(&a[1])])
}

/// ZF checks on the monodromy realization with `L′` inner sites, exact.
pub fn check_zf_monodromy(model: &Model, l_inner: usize, x1: &Rational, x2: &Rational) -> Vec<CheckReport> {
    let points = vec![format!("L'={l_inner}"), x1.to_string(), x2.to_string()];
    let id: Rational = model.convention().identity_point();
    let at_identity = monodromy_a(model, l_inner, &Dual::variable(id)).map(split_dual);
    zf_reports(model, points, Scope::Full, |x| monodromy_a(model, l_inner, x), at_identity, x1, x2)
}

/// ZF checks on the truncated RD representation, exact on interior indices.
pub fn check_zf_rd(model: &Model, n: usize, x1: &Rational, x2: &Rational) -> Vec<CheckReport> {
    let points = vec![format!("N={n}"), x1.to_string(), x2.to_string()];
    let rep = match rd_representation_exact(model, n) {
        Ok(r) => r,
        Err(e) => return vec![CheckReport::run(model.name(), "zf.relation", points, || Err(e))],
    };
    let at_identity = rd_a(&rep, &int(1)).and_then(|a0| Ok((a0, rd_a_prime(&rep)?)));
    zf_reports(model, points, Scope::Interior { n }, |x| rd_a(&rep, x), at_identity, x1, x2)
}

fn apply_k<S: Field>(k: &Mat<S>, a: &[SparseMat<S>; 2], i: usize) -> SparseMat<S> {
    a[0].scale(k.get(i, 0)).add(&a[1].scale(k.get(i, 1)))
}

/// Boundary ZF relations on the RD representation, their derivative form at `x = 1`,
/// and the `x ↔ 1/x` symmetry of `C = A₁ + A₂` on both boundary vectors.
pub fn check_gz(model: &Model, n: usize, x: &Rational) -> Vec<CheckReport> {
    let points = vec![format!("N={n}"), x.to_string()];
    let name = model.name();
    let rep = match rd_representation_exact(model, n) {
        Ok(r) => r,
        Err(e) => return vec![CheckReport::run(name, "gz.representation", points, || Err(e))],
    };
    let left = |ops: Vec<SparseMat<Rational>>| {
        first_failure(ops.iter().map(|o| {
            let row = o.vec_mul(&rep.w);
            compare_interior_vec(&row, &vec![int(0); row.len()], n, 1)
        }))
    };
    let right = |ops: Vec<SparseMat<Rational>>| {
        first_failure(ops.iter().map(|o| {
            let col = o.mul_vec(&rep.v);
            compare_interior_vec(&col, &vec![int(0); col.len()], n, 1)
        }))
    };
    let gz = |kind: BoundaryKind| -> Result<Vec<SparseMat<Rational>>> {
        let k = model.k_matrix(kind, x)?;
        let inv = x.try_inv().ok_or_else(|| Error::Pole("x".into()))?;
        let (ax, ainv) = (rd_a(&rep, x)?, rd_a(&rep, &inv)?);
        Ok((0..2).map(|i| apply_k(&k, &ainv, i).sub(&ax[i])).collect())
    };
    let ops = model.local_operators();
    let inv_rho = model.rho().recip();
    let deriv = |b: &Mat<Rational>, sign: i64| -> Result<Vec<SparseMat<Rational>>> {
        let (a0, ap) = (rd_a(&rep, &int(1))?, rd_a_prime(&rep)?);
        Ok((0..2).map(|i| apply_k(b, &a0, i).add(&ap[i].scale(&(&inv_rho * int(sign))))).collect())
    };
    let c_sym = || -> Result<Status> {
        let inv = x.try_inv().ok_or_else(|| Error::Pole("x".into()))?;
        let c = |y: &Rational| -> Result<SparseMat<Rational>> {
            let [p, q] = rd_a(&rep, y)?;
            Ok(p.add(&q))
        };
        let diff = c(x)?.sub(&c(&inv)?);
        let [p, q] = rd_a_prime(&rep)?;
        let cp = p.add(&q);
        Ok(first_failure([left(vec![diff.clone(), cp.clone()]), right(vec![diff, cp])]))
    };
    vec![
        CheckReport::run(name, "gz.left", points.clone(), || Ok(left(gz(BoundaryKind::K)?))),
        CheckReport::run(name, "gz.right", points.clone(), || Ok(right(gz(BoundaryKind::Kbar)?))),
        CheckReport::run(name, "gz.left_derivative", points.clone(), || Ok(left(deriv(&ops.b, -1)?))),
        CheckReport::run(name, "gz.right_derivative", points.clone(), || Ok(right(deriv(&ops.bbar, 1)?))),
        CheckReport::run(name, "gz.c_symmetry", points, c_sym),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct RdSiteValues<S> {
    pub density: S,
    /// Net flow across the bond `(i, i+1)`; absent at `i = L`.
    pub current_lat: Option<S>,
    /// Net pair annihilation on the bond `(i, i+1)`; absent at `i = L`.
    pub current_eva: Option<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RdClosedForm<S> {
    pub exact: RdSiteValues<S>,
    /// Large-L forms, using the nearer boundary.
    pub asymptotic: RdSiteValues<S>,
}

/// Closed-form density and currents at site `i` (1-based) of the RD chain of length `l`.
pub fn rd_closed_forms<S: Field>(model: &Model, l: usize, i: usize) -> Result<RdClosedForm<S>> {
    if l == 0 || i == 0 || i > l {
        return Err(Error::InvalidParameter(format!("site {i} outside 1..={l}")));
    }
    let k = RdConstants::new(model)?;
    let s = |q: &Rational| S::from_rational(q);
    let (phi, a, b, c, d) = (s(&k.phi), s(&k.a), s(&k.b), s(&k.c), s(&k.d));
    let kappa = s(model.kappa());
    let one = S::one();
    let half = s(&rat(1, 2));
    let p = |e: usize| phi.pow(e as u32);
    let denom = one.clone() - a.clone() * b.clone() * p(2 * l - 2);
    let inv_den = denom.try_inv().ok_or_else(|| Error::Pole("1 − abφ^{2L−2}".into()))?;
    let inv_kp1 = (kappa.clone() + one.clone()).try_inv().ok_or_else(|| Error::Pole("κ + 1".into()))?;

    let density = half.clone()
        - (c.clone() * p(i - 1) + a.clone() * d.clone() * p(l + i - 2) + d.clone() * p(l - i) + b.clone() * c.clone() * p(2 * l - i - 1))
            * inv_den.clone()
            * half.clone();
    let (current_lat, current_eva) = if i < l {
        let lat = kappa.clone() * kappa.clone() * inv_kp1.clone()
            * (d.clone() * p(l - i - 1) + b.clone() * c.clone() * p(2 * l - i - 2)
                - c.clone() * p(i - 1)
                - a.clone() * d.clone() * p(l + i - 2))
            * inv_den.clone();
        let eva = -(kappa.clone() * inv_kp1.clone())
            * (c.clone() * p(i - 1) + a.clone() * d.clone() * p(l + i - 2) + d.clone() * p(l - i - 1) + b.clone() * c.clone() * p(2 * l - i - 2))
            * inv_den;
        (Some(lat), Some(eva))
    } else {
        (None, None)
    };

    // Boundary amplitudes (α−γ)/(2κ+α+γ) = −c and (δ−β)/(2κ+δ+β) = −d.
    let from_left = i - 1 <= l - i;
    let density_asym = if from_left {
        half.clone() * (one.clone() - c.clone() * p(i - 1))
    } else {
        half.clone() * (one.clone() - d.clone() * p(l - i))
    };
    let (lat_asym, eva_asym) = if i < l {
        let k2 = kappa.clone() * kappa.clone() * inv_kp1.clone();
        let k1 = kappa * inv_kp1;
        if from_left {
            let amp = -c * p(i - 1);
            (Some(k2 * amp.clone()), Some(k1 * amp))
        } else {
            let amp = -d * p(l - i - 1);
            (Some(-(k2 * amp.clone())), Some(k1 * amp))
        }
    } else {
        (None, None)
    };
    Ok(RdClosedForm {
        exact: RdSiteValues { density, current_lat, current_eva },
        asymptotic: RdSiteValues { density: density_asym, current_lat: lat_asym, current_eva: eva_asym },
    })
}

/// Closed forms at every site.
pub fn rd_profile<S: Field>(model: &Model, l: usize) -> Result<Vec<RdClosedForm<S>>> {
    (1..=l).into_par_iter().map(|i| rd_closed_forms(model, l, i)).collect()
}

/// `J_lat(i−1) − J_lat(i) − J_eva(i−1) − J_eva(i) = 0` for interior sites, exactly.
pub fn check_current_balance(model: &Model, l: usize) -> CheckReport {
    CheckReport::run(model.name(), "rd.current_balance", vec![format!("L={l}")], || {
        let prof: Vec<RdClosedForm<Rational>> = rd_profile(model, l)?;
        for i in 2..l {
            let (prev, cur) = (&prof[i - 2].exact, &prof[i - 1].exact);
            let get = |v: &Option<Rational>| v.clone().expect("bond current");
            let total = get(&prev.current_lat) - get(&cur.current_lat) - get(&prev.current_eva) - get(&cur.current_eva);
            if !Field::is_zero(&total) {
                return Ok(Status::Fail {
                    witness: Some(Witness { row: i, col: 0, lhs: total.to_string(), rhs: "0".into() }),
                    message: format!("balance violated at site {i}"),
                });
            }
        }
        Ok(Status::Pass)
    })
}

/// Largest relative difference `|a − b| / max(|a|, |b|)` over paired entries, zero when both vanish.
pub fn max_relative_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Whether `value ≤ tol` when both are read as exact rationals.
pub fn within(value: f64, tol: &Rational) -> bool {
    from_f64(value).is_some_and(|v| &v <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{build_markov, observables, steady_state};
    use crate::models::Rates;

    fn rd(alpha: Rational, beta: Rational, gamma: Rational, delta: Rational, kappa: i64) -> Model {
        Model::rd(Rates::new(alpha, beta, gamma, delta), int(kappa)).unwrap()
    }

    #[test]
    fn tasep_two_sites() {
        let rep = tasep_representation(&int(1), &int(1), 3).unwrap();
        let d = steady_from_ansatz(&rep, 2).unwrap();
        assert_eq!(d.probabilities(), vec![rat(1, 5), rat(1, 5), rat(2, 5), rat(1, 5)]);
    }

    #[test]
    fn tasep_relations_hold() {
        for r in check_tasep_relations(&rat(1, 2), &rat(1, 3), 6) {
            assert!(r.status.is_pass(), "{r:?}");
        }
    }

    #[test]
    fn tasep_truncation_too_small() {
        let rep = tasep_representation(&int(1), &int(1), 3).unwrap();
        assert!(steady_from_ansatz(&rep, 3).is_err());
        assert!(tasep_representation(&int(0), &int(1), 3).is_err());
    }

    #[test]
    fn rd_constants_example() {
        let k = RdConstants::new(&rd(int(1), int(1), int(0), int(0), 3)).unwrap();
        assert_eq!((k.a, k.c, k.phi), (rat(5, 7), rat(-1, 7), rat(1, 2)));
    }

    #[test]
    fn rd_mirror_matches_negated_kappa() {
        let r = Rates::new(int(1), rat(2, 3), rat(1, 5), rat(1, 7));
        let k = RdConstants::new(&Model::rd(r.clone(), int(3)).unwrap()).unwrap();
        let m = RdConstants::new(&Model::rd(r, int(-3)).unwrap()).unwrap();
        assert_eq!(k.mirrored().unwrap(), m);
    }

    #[test]
    fn rd_degenerate_boundaries_rejected() {
        let m = rd(int(1), int(1), int(1), rat(1, 2), 3);
        assert!(matches!(rd_representation(&m, 4), Err(Error::InvalidParameter(_))));
        let m = rd(int(1), int(1), rat(1, 2), rat(1, 3), -3);
        assert!(matches!(rd_representation(&m, 4), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn rd_relations_on_interior() {
        let m = rd(int(1), int(1), rat(1, 2), rat(1, 3), 3);
        for r in check_rd_relations(&m, 7) {
            assert!(r.status.is_pass(), "{r:?}");
        }
    }

    #[test]
    fn rd_density_example() {
        let m = rd(int(1), int(1), int(0), int(0), 3);
        let cf: RdClosedForm<Rational> = rd_closed_forms(&m, 2, 1).unwrap();
        assert_eq!(cf.exact.density, rat(10, 19));
        let obs = observables(&steady_state(&m, 2).unwrap(), &m);
        assert_eq!(obs.density[0], rat(10, 19));
    }

    #[test]
    fn rd_steady_matches_nullspace() {
        let m = rd(int(1), int(1), rat(1, 2), rat(1, 3), 3);
        for l in 1..=3 {
            let (d, _) = rd_steady_converged(&m, l, DEFAULT_TRUNCATION_CAP).unwrap();
            let exact = steady_state(&m, l).unwrap().to_f64();
            assert!(max_relative_difference(&d.probabilities(), &exact.probabilities()) < 1e-10);
            let mk = build_markov(&m, l).unwrap().map(to_f64);
            assert!(mk.mul_vec(&d.probabilities()).iter().all(|x| x.abs() < 1e-10));
        }
    }

    #[test]
    fn monodromy_zf_asep() {
        let m = Model::asep(Rates::new(int(1), int(1), rat(1, 2), rat(1, 3)), int(2)).unwrap();
        for r in check_zf_monodromy(&m, 2, &int(2), &int(3)) {
            assert!(r.status.is_pass(), "{r:?}");
        }
    }

    #[test]
    fn zf_detects_wrong_argument() {
        let m = Model::ssep(Rates::new(int(1), int(1), rat(1, 2), rat(1, 3)));
        let a = |x: &Rational| monodromy_a::<Rational>(&m, 2, x);
        let r = m.r_matrix(&int(7)).unwrap();
        let lhs = apply_local(&r, &pair_products(&a(&int(2)).unwrap(), &a(&int(3)).unwrap()));
        let rhs = swapped(&pair_products(&a(&int(3)).unwrap(), &a(&int(2)).unwrap()));
        assert!(compare_ops(&lhs, &rhs, Scope::Full, 2).is_fail());
    }

    #[test]
    fn gz_at_identity_and_sample() {
        let m = rd(int(1), int(1), int(0), rat(1, 3), 3);
        let m = m.with_rates(Rates::new(int(1), int(1), rat(1, 2), rat(1, 3)));
        for x in [int(1), int(2)] {
            for r in check_gz(&m, 7, &x) {
                assert!(r.status.is_pass(), "{r:?}");
            }
        }
    }

    #[test]
    fn boundary_recursion_detects_wrong_constant() {
        let m = rd(int(1), int(1), rat(1, 2), rat(1, 3), 3);
        let k = RdConstants::new(&m).unwrap();
        let rep = rd_representation_exact(&m, 6).unwrap();
        let g = |s: &str| rep.letter(s).unwrap().clone();
        let op = |c: &Rational| g("G1").sub(&g("G2").scale(c)).sub(&g("G3").scale(&k.a));
        let zero = vec![int(0); 36];
        assert!(compare_interior_vec(&op(&k.c).vec_mul(&rep.w), &zero, 6, 1).is_pass());
        assert!(compare_interior_vec(&op(&(&k.c + int(1))).vec_mul(&rep.w), &zero, 6, 1).is_fail());
    }

    #[test]
    fn interior_excludes_edges() {
        assert!(interior(0, 5, 2));
        assert!(!interior(3, 5, 1));
        assert!(!interior(3 * 5, 5, 1));
        assert!(interior(2 * 5 + 2, 5, 1));
    }
}
