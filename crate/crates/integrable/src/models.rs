//! The four exclusion-type models: local jump operators, R- and K-matrices,
//! crossing data and Markovian vectors.
//!
//! Every matrix constructor is generic over [`Field`], so the same code yields
//! exact values (rationals), exact derivatives (dual numbers) and closed forms
//! (rational functions).

use std::fmt;
use std::str::FromStr;

use exclusion_core::{
    int, partial_trace_first, partial_transpose, permutation_op, Field, Leg, Mat, RatFunc, Rational,
};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Asep,
    Tasep,
    Ssep,
    Rd,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Asep => "ASEP",
            ModelKind::Tasep => "TASEP",
            ModelKind::Ssep => "SSEP",
            ModelKind::Rd => "RD",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asep" => Ok(ModelKind::Asep),
            "tasep" => Ok(ModelKind::Tasep),
            "ssep" => Ok(ModelKind::Ssep),
            "rd" => Ok(ModelKind::Rd),
            _ => Err(Error::InvalidParameter(format!("unknown model '{s}'"))),
        }
    }
}

/// How spectral parameters combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    Multiplicative,
    Additive,
}

impl Convention {
    /// `x₁/x₂` or `x₁ − x₂`.
    pub fn compose<S: Field>(self, a: &S, b: &S) -> Result<S> {
        match self {
            Convention::Multiplicative => {
                a.try_div(b).ok_or_else(|| Error::Pole("spectral parameter in x1/x2".into()))
            }
            Convention::Additive => Ok(a.clone() - b.clone()),
        }
    }

    /// `1/x` or `−x`.
    pub fn invert<S: Field>(self, x: &S) -> Result<S> {
        match self {
            Convention::Multiplicative => x.try_inv().ok_or_else(|| Error::Pole("spectral parameter x".into())),
            Convention::Additive => Ok(-x.clone()),
        }
    }

    /// `x₁·x₂` or `x₁ + x₂`.
    pub fn reflect_compose<S: Field>(self, a: &S, b: &S) -> S {
        match self {
            Convention::Multiplicative => a.clone() * b.clone(),
            Convention::Additive => a.clone() + b.clone(),
        }
    }

    pub fn identity_point<S: Field>(self) -> S {
        match self {
            Convention::Multiplicative => S::one(),
            Convention::Additive => S::zero(),
        }
    }
}

/// Boundary rates: injection α and extraction γ on the left, extraction β and injection δ on the right.
#[derive(Clone, Debug, PartialEq)]
pub struct Rates {
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
    pub delta: Rational,
}

impl Rates {
    pub fn new(alpha: Rational, beta: Rational, gamma: Rational, delta: Rational) -> Self {
        Rates { alpha, beta, gamma, delta }
    }

    /// Mirror image of the chain: α↔δ, γ↔β.
    pub fn mirrored(&self) -> Self {
        Rates { alpha: self.delta.clone(), beta: self.gamma.clone(), gamma: self.beta.clone(), delta: self.alpha.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Left reflection matrix `K`.
    K,
    /// Right reflection matrix `K̄`.
    Kbar,
    /// Dual reflection matrix `K̃` entering the transfer matrix.
    Ktilde,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::K => "K",
            BoundaryKind::Kbar => "Kbar",
            BoundaryKind::Ktilde => "Ktilde",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperators {
    pub w: Mat<Rational>,
    pub b: Mat<Rational>,
    pub bbar: Mat<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    kind: ModelKind,
    rates: Rates,
    q: Rational,
    kappa: Rational,
    markov_a: Rational,
    markov_b: Rational,
}

fn div<S: Field>(num: S, den: S, what: &str) -> Result<S> {
    num.try_div(&den).ok_or_else(|| Error::Pole(what.to_string()))
}

fn c<S: Field>(q: &Rational) -> S {
    S::from_rational(q)
}

fn n<S: Field>(v: i64) -> S {
    S::from_int(v)
}

/// `[[d,0,0,o],[0,a,b,0],[0,c,e,0],[o,0,0,d]]`, the common sparsity pattern of all R-matrices here.
fn r_shape<S: Field>(d: S, o: S, a: S, b: S, c: S, e: S) -> Mat<S> {
    let z = S::zero();
    Mat::from_rows(vec![
        vec![d.clone(), z.clone(), z.clone(), o.clone()],
        vec![z.clone(), a, b, z.clone()],
        vec![z.clone(), c, e, z.clone()],
        vec![o, z.clone(), z, d],
    ])
}

fn mat2<S: Field>(a: S, b: S, c: S, d: S) -> Mat<S> {
    Mat::from_vec(2, 2, vec![a, b, c, d])
}

impl Model {
    /// ASEP with bulk hopping rates 1 (right) and q (left); q ∉ {0, 1}.
    pub fn asep(rates: Rates, q: Rational) -> Result<Self> {
        if Field::is_zero(&q) || q == int(1) {
            return Err(Error::InvalidParameter(
                "ASEP needs q ∉ {0, 1}; use the TASEP (q = 0) or SSEP (q = 1) models".into(),
            ));
        }
        Ok(Self::build(ModelKind::Asep, rates, q, int(0)))
    }

    /// TASEP; only injection α on the left and extraction β on the right.
    pub fn tasep(alpha: Rational, beta: Rational) -> Self {
        Self::build(ModelKind::Tasep, Rates::new(alpha, beta, int(0), int(0)), int(0), int(0))
    }

    pub fn ssep(rates: Rates) -> Self {
        Self::build(ModelKind::Ssep, rates, int(1), int(0))
    }

    /// Reaction–diffusion model with diffusion rate κ²; κ ∉ {0, ±1}.
    pub fn rd(rates: Rates, kappa: Rational) -> Result<Self> {
        if Field::is_zero(&kappa) || kappa == int(1) || kappa == int(-1) {
            return Err(Error::InvalidParameter("RD needs κ ∉ {0, 1, −1}".into()));
        }
        Ok(Self::build(ModelKind::Rd, rates, int(0), kappa))
    }

    fn build(kind: ModelKind, rates: Rates, q: Rational, kappa: Rational) -> Self {
        Model { kind, rates, q, kappa, markov_a: int(1), markov_b: int(1) }
    }

    /// Sets the constants `a, b` of the Markovian vector `v(x)`.
    pub fn with_markov_vector(mut self, a: Rational, b: Rational) -> Self {
        self.markov_a = a;
        self.markov_b = b;
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn rates(&self) -> &Rates {
        &self.rates
    }

    /// Left hopping rate: q for ASEP, 0 for TASEP, 1 for SSEP, unused for RD.
    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn kappa(&self) -> &Rational {
        &self.kappa
    }

    /// Same model with different boundary rates.
    pub fn with_rates(&self, rates: Rates) -> Self {
        Model { rates, ..self.clone() }
    }

    pub fn convention(&self) -> Convention {
        match self.kind {
            ModelKind::Ssep => Convention::Additive,
            _ => Convention::Multiplicative,
        }
    }

    /// The constant in `P R′(identity) = ρ w`.
    pub fn rho(&self) -> Rational {
        match self.kind {
            ModelKind::Asep => (&self.q - int(1)).recip(),
            ModelKind::Tasep => int(-1),
            ModelKind::Ssep => int(1),
            ModelKind::Rd => (int(2) * &self.kappa).recip(),
        }
    }

    /// Parameter list for reports.
    pub fn params(&self) -> Vec<(&'static str, Rational)> {
        let r = &self.rates;
        let mut out = vec![("alpha", r.alpha.clone()), ("beta", r.beta.clone())];
        if self.kind != ModelKind::Tasep {
            out.push(("gamma", r.gamma.clone()));
            out.push(("delta", r.delta.clone()));
        }
        match self.kind {
            ModelKind::Asep => out.push(("q", self.q.clone())),
            ModelKind::Rd => out.push(("kappa", self.kappa.clone())),
            _ => {}
        }
        out
    }

    pub fn local_operators(&self) -> LocalOperators {
        let Rates { alpha, beta, gamma, delta } = &self.rates;
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma), ("delta", delta)] {
            if v < &int(0) {
                log::warn!("{} rate {name} = {v} is negative; the generator is not stochastic", self.name());
            }
        }
        let z = int(0);
        let b = mat2(-alpha.clone(), gamma.clone(), alpha.clone(), -gamma.clone());
        let bbar = mat2(-delta.clone(), beta.clone(), delta.clone(), -beta.clone());
        let w = match self.kind {
            ModelKind::Asep | ModelKind::Tasep | ModelKind::Ssep => {
                let q = &self.q;
                Mat::from_rows(vec![
                    vec![z.clone(), z.clone(), z.clone(), z.clone()],
                    vec![z.clone(), -q.clone(), int(1), z.clone()],
                    vec![z.clone(), q.clone(), int(-1), z.clone()],
                    vec![z.clone(), z.clone(), z.clone(), z.clone()],
                ])
            }
            ModelKind::Rd => {
                let k2 = &self.kappa * &self.kappa;
                Mat::from_rows(vec![
                    vec![int(-1), z.clone(), z.clone(), int(1)],
                    vec![z.clone(), -k2.clone(), k2.clone(), z.clone()],
                    vec![z.clone(), k2.clone(), -k2.clone(), z.clone()],
                    vec![int(1), z.clone(), z.clone(), int(-1)],
                ])
            }
        };
        LocalOperators { w, b, bbar }
    }

    pub fn r_matrix<S: Field>(&self, x: &S) -> Result<Mat<S>> {
        let one = S::one();
        let x = x.clone();
        match self.kind {
            ModelKind::Asep => {
                let q: S = c(&self.q);
                let den = q.clone() * x.clone() - one.clone();
                let w = "qx − 1";
                Ok(r_shape(
                    one.clone(),
                    S::zero(),
                    div((x.clone() - one.clone()) * q.clone(), den.clone(), w)?,
                    div((q.clone() - one.clone()) * x.clone(), den.clone(), w)?,
                    div(q - one.clone(), den.clone(), w)?,
                    div(x - one, den, w)?,
                ))
            }
            ModelKind::Tasep => Ok(r_shape(one.clone(), S::zero(), S::zero(), x.clone(), one.clone(), one - x)),
            ModelKind::Ssep => {
                let den = x.clone() + one.clone();
                let w = "x + 1";
                Ok(r_shape(
                    one.clone(),
                    S::zero(),
                    div(x.clone(), den.clone(), w)?,
                    div(one.clone(), den.clone(), w)?,
                    div(one, den.clone(), w)?,
                    div(x, den, w)?,
                ))
            }
            ModelKind::Rd => {
                let k: S = c(&self.kappa);
                let xp = x.clone() + one.clone();
                let xm = x.clone() - one;
                let a = k.clone() * xp.clone() + xm.clone();
                let b = k.clone() * xm.clone() + xp.clone();
                let wa = "κ(x+1) + x − 1";
                let wb = "κ(x−1) + x + 1";
                Ok(r_shape(
                    div(k.clone() * xp.clone(), a.clone(), wa)?,
                    div(xm.clone(), a, wa)?,
                    div(k.clone() * xm.clone(), b.clone(), wb)?,
                    div(xp.clone(), b.clone(), wb)?,
                    div(xp, b.clone(), wb)?,
                    div(k * xm, b, wb)?,
                ))
            }
        }
    }

    pub fn k_matrix<S: Field>(&self, kind: BoundaryKind, x: &S) -> Result<Mat<S>> {
        match kind {
            BoundaryKind::K => self.k_left(x),
            BoundaryKind::Kbar => self.k_right(x),
            BoundaryKind::Ktilde => self.k_dual(x),
        }
    }

    fn k_left<S: Field>(&self, x: &S) -> Result<Mat<S>> {
        let Rates { alpha, gamma, .. } = &self.rates;
        let (a, g): (S, S) = (c(alpha), c(gamma));
        let x = x.clone();
        let one = S::one();
        let x2m1 = x.clone() * x.clone() - one.clone();
        match self.kind {
            ModelKind::Asep => {
                let q: S = c(&self.q);
                let den = x.clone() * x.clone() * g.clone() + q.clone() * x.clone() + x.clone() * a.clone()
                    - x.clone() * g.clone()
                    - x.clone()
                    - a.clone();
                let w = "boundary denominator of K";
                Ok(mat2(
                    div(
                        (-(x.clone() * a.clone()) + x.clone() * g.clone() + q.clone() + a.clone() - g.clone() - one.clone())
                            * x.clone(),
                        den.clone(),
                        w,
                    )?,
                    div(x2m1.clone() * g.clone(), den.clone(), w)?,
                    div(a.clone() * x2m1, den.clone(), w)?,
                    div(
                        -(-(q * x.clone()) - x.clone() * a.clone() + x.clone() * g.clone() + x + a - g),
                        den,
                        w,
                    )?,
                ))
            }
            ModelKind::Tasep => {
                let den = x.clone() * a.clone() - x.clone() - a.clone();
                let w = "xα − x − α";
                Ok(mat2(
                    div((-(x.clone() * a.clone()) + a.clone() - one.clone()) * x, den.clone(), w)?,
                    S::zero(),
                    div(a * x2m1, den, w)?,
                    one,
                ))
            }
            ModelKind::Ssep => {
                let den = x.clone() * (a.clone() + g.clone()) + one.clone();
                let w = "x(α+γ) + 1";
                let two: S = n(2);
                Ok(mat2(
                    div(x.clone() * (g.clone() - a.clone()) + one.clone(), den.clone(), w)?,
                    div(two.clone() * x.clone() * g.clone(), den.clone(), w)?,
                    div(two * x.clone() * a.clone(), den.clone(), w)?,
                    div(x * (a - g) + one, den, w)?,
                ))
            }
            ModelKind::Rd => self.rd_boundary(x, a, g, 1),
        }
    }

    fn k_right<S: Field>(&self, x: &S) -> Result<Mat<S>> {
        let Rates { beta, delta, .. } = &self.rates;
        let (b, d): (S, S) = (c(beta), c(delta));
        let x = x.clone();
        let one = S::one();
        let x2m1 = x.clone() * x.clone() - one.clone();
        match self.kind {
            ModelKind::Asep => {
                let q: S = c(&self.q);
                let den = -(x.clone() * x.clone() * b.clone()) + q.clone() * x.clone() - x.clone() * d.clone()
                    + x.clone() * b.clone()
                    - x.clone()
                    + d.clone();
                let w = "boundary denominator of Kbar";
                Ok(mat2(
                    div(
                        (x.clone() * d.clone() - x.clone() * b.clone() + q.clone() - d.clone() + b.clone() - one.clone())
                            * x.clone(),
                        den.clone(),
                        w,
                    )?,
                    div(-(x2m1.clone() * b.clone()), den.clone(), w)?,
                    div(-(x2m1 * d.clone()), den.clone(), w)?,
                    div(q * x.clone() - x.clone() * d.clone() + x.clone() * b.clone() - x + d - b, den, w)?,
                ))
            }
            ModelKind::Tasep => {
                let den = -(x.clone() * x.clone() * b.clone()) + x.clone() * b.clone() - x.clone();
                let w = "x(xβ − β + 1)";
                Ok(mat2(
                    one,
                    div(-(x2m1 * b.clone()), den.clone(), w)?,
                    S::zero(),
                    div(x.clone() * b.clone() - x - b, den, w)?,
                ))
            }
            ModelKind::Ssep => {
                let den = x.clone() * (d.clone() + b.clone()) - one.clone();
                let w = "x(δ+β) − 1";
                let two: S = n(2);
                Ok(mat2(
                    div(x.clone() * (b.clone() - d.clone()) - one.clone(), den.clone(), w)?,
                    div(two.clone() * x.clone() * b.clone(), den.clone(), w)?,
                    div(two * x.clone() * d.clone(), den.clone(), w)?,
                    div(x * (d - b) - one, den, w)?,
                ))
            }
            ModelKind::Rd => self.rd_boundary(x, b, d, -1),
        }
    }

    /// Shared shape of the RD left (sign = 1, rates α, γ) and right (sign = −1,
    /// rates β, δ) boundary matrices.
    fn rd_boundary<S: Field>(&self, x: S, p: S, m: S, sign: i64) -> Result<Mat<S>> {
        let k: S = c(&self.kappa);
        let one = S::one();
        let two: S = n(2);
        let four: S = n(4);
        let s: S = n(sign);
        let x2 = x.clone() * x.clone();
        let x2m1 = x2.clone() - one.clone();
        let x2p1 = x2 + one;
        let diff = m.clone() - p.clone();
        let sum = p + m;
        let den = two.clone() * x.clone() * (s.clone() * x2m1.clone() * sum.clone() + two.clone() * k.clone() * x2p1.clone());
        let w = if sign > 0 { "boundary denominator of K" } else { "boundary denominator of Kbar" };
        let cross = two * x.clone() * sum * s;
        Ok(mat2(
            div(x2p1.clone() * (x2m1.clone() * diff.clone() + four.clone() * x.clone() * k.clone()), den.clone(), w)?,
            div(x2m1.clone() * (x2p1.clone() * diff.clone() + cross.clone()), den.clone(), w)?,
            div(-(x2m1.clone() * (x2p1.clone() * diff.clone() - cross)), den.clone(), w)?,
            div(-(x2p1 * (x2m1 * diff - four * x * k)), den, w)?,
        ))
    }

    fn k_dual<S: Field>(&self, x: &S) -> Result<Mat<S>> {
        let Rates { beta, delta, .. } = &self.rates;
        let (b, d): (S, S) = (c(beta), c(delta));
        let x = x.clone();
        let one = S::one();
        match self.kind {
            ModelKind::Asep => {
                let q: S = c(&self.q);
                let qm1 = q.clone() - one.clone();
                let pre = div(
                    q.clone() * x.clone() * x.clone() - one.clone(),
                    (d.clone() * x.clone() + b.clone()) * (x.clone() - one.clone()) + qm1.clone() * x.clone(),
                    "(δx+β)(x−1) + (q−1)x",
                )?;
                let qx = q.clone() * x.clone();
                let den2 = qx.clone() * qx.clone() - one;
                let w = "q²x² − 1";
                Ok(mat2(
                    pre.clone()
                        * div(
                            qx.clone() * (qm1.clone() - d.clone() + b.clone()) + d.clone() - b.clone(),
                            den2.clone(),
                            w,
                        )?,
                    pre.clone() * b.clone(),
                    pre.clone() * div(d.clone(), q, "q")?,
                    pre * div(x * (qx * (d.clone() - b.clone()) + qm1 - d + b), den2, w)?,
                ))
            }
            ModelKind::Tasep => {
                let den = x.clone() * (b.clone() - one.clone()) - b.clone();
                let w = "x(β−1) − β";
                Ok(mat2(
                    div(-b.clone(), den.clone(), w)?,
                    div(-b.clone(), den.clone(), w)?,
                    S::zero(),
                    div(x * (b - one), den, w)?,
                ))
            }
            ModelKind::Ssep => {
                let two: S = n(2);
                let xp1 = x.clone() + one.clone();
                let pre = div(
                    two.clone() * x.clone() + one.clone(),
                    x * (d.clone() + b.clone()) + one.clone(),
                    "x(δ+β) + 1",
                )?;
                let half = two * xp1.clone();
                let w = "2(x+1)";
                Ok(mat2(
                    pre.clone() * div(xp1.clone() * (b.clone() - d.clone()) + one.clone(), half.clone(), w)?,
                    pre.clone() * b.clone(),
                    pre.clone() * d.clone(),
                    pre * div(xp1 * (d - b) + one, half, w)?,
                ))
            }
            ModelKind::Rd => {
                let closed = self.ktilde_from_kbar(&RatFunc::x())?;
                closed.try_map(|f| f.eval(&x).ok_or_else(|| Error::Pole(format!("denominator {} of Ktilde", f.denom()))))
            }
        }
    }

    /// The boundary matrix with a rational twist `τ` (standing for `e^s`) on the
    /// left ASEP boundary: off-diagonal entries scaled by `1/τ` and `τ`.
    pub fn twisted_k<S: Field>(&self, tau: &Rational, x: &S) -> Result<Mat<S>> {
        if self.kind != ModelKind::Asep {
            return Err(Error::unsupported("twisted K", self.name()));
        }
        let t: S = c(tau);
        let ti = t.try_inv().ok_or_else(|| Error::InvalidParameter("twist τ must be nonzero".into()))?;
        let k = self.k_left(x)?;
        Ok(mat2(k.get(0, 0).clone(), k.get(0, 1).clone() * ti, k.get(1, 0).clone() * t, k.get(1, 1).clone()))
    }

    /// Boundary operator generated by the twisted `K`: `K_τ′(1) = 2ρ·B_τ`.
    pub fn twisted_b(&self, tau: &Rational) -> Result<Mat<Rational>> {
        if Field::is_zero(tau) {
            return Err(Error::InvalidParameter("twist τ must be nonzero".into()));
        }
        let b = self.local_operators().b;
        Ok(mat2(b.get(0, 0).clone(), b.get(0, 1) / tau, b.get(1, 0) * tau, b.get(1, 1).clone()))
    }

    /// `v(x) = (a·x, b)` for ASEP/TASEP, `(a, b)` for SSEP.
    pub fn markov_vector<S: Field>(&self, x: &S) -> Result<[S; 2]> {
        let (a, b): (S, S) = (c(&self.markov_a), c(&self.markov_b));
        match self.kind {
            ModelKind::Asep | ModelKind::Tasep => Ok([a * x.clone(), b]),
            ModelKind::Ssep => Ok([a, b]),
            ModelKind::Rd => Err(Error::unsupported("a scalar Markovian vector", self.name())),
        }
    }

    /// `x ↦ 1/(Qx)` (multiplicative) or `x ↦ −x − 2` (SSEP).
    pub fn cross_shift<S: Field>(&self, x: &S) -> Result<S> {
        let q_cross: S = match self.kind {
            ModelKind::Asep => c(&(&self.q * &self.q)),
            ModelKind::Rd => {
                let p = &self.kappa + int(1);
                let m = &self.kappa - int(1);
                c(&((&p * &p) / (&m * &m)))
            }
            ModelKind::Ssep => return Ok(-x.clone() - n(2)),
            ModelKind::Tasep => return Err(self.no_crossing()),
        };
        (q_cross * x.clone()).try_inv().ok_or_else(|| Error::Pole("Qx".into()))
    }

    /// The matrix `U` of the crossing relation.
    pub fn crossing_u(&self) -> Result<Mat<Rational>> {
        match self.kind {
            ModelKind::Asep => Ok(Mat::diag(&[int(1), self.q.clone()])),
            ModelKind::Ssep | ModelKind::Rd => Ok(Mat::identity(2)),
            ModelKind::Tasep => Err(self.no_crossing()),
        }
    }

    /// Scalar `λ(x)` of the crossing relation.
    pub fn crossing_lambda<S: Field>(&self, x: &S) -> Result<S> {
        let x = x.clone();
        let one = S::one();
        match self.kind {
            ModelKind::Asep => {
                let q: S = c(&self.q);
                let d = q.clone() * x.clone() - one.clone();
                div((x.clone() - one.clone()) * (q.clone() * q * x - one), d.clone() * d, "qx − 1")
            }
            ModelKind::Ssep => {
                let d = x.clone() + one;
                div(x.clone() * (x + n(2)), d.clone() * d, "x + 1")
            }
            ModelKind::Rd => {
                let kp: S = c(&(&self.kappa + int(1)));
                let km: S = c(&(&self.kappa - int(1)));
                let kp2 = kp.clone() * kp.clone();
                let km2 = km.clone() * km.clone();
                let num = (x.clone() * x.clone() - one)
                    * (x.clone() * kp2.clone() + km2.clone())
                    * (x.clone() * kp2 - km2);
                let d1 = x.clone() * kp.clone() + km.clone();
                let d2 = x * kp - km;
                div(num, d1.clone() * d1 * d2.clone() * d2, "x(κ+1) ± (κ−1)")
            }
            ModelKind::Tasep => Err(self.no_crossing()),
        }
    }

    fn no_crossing(&self) -> Error {
        Error::unsupported("crossing data (partial transpose singular)", self.name())
    }

    /// `K̃₁(x) = tr₀( K̄₀(1/x) ((R₀₁(x²)^{t₁})^{-1})^{t₁} P₀₁ )`, additive analog for SSEP.
    pub fn ktilde_from_kbar<S: Field>(&self, x: &S) -> Result<Mat<S>> {
        if self.kind == ModelKind::Tasep {
            return Err(Error::unsupported("the dual boundary map (partial transpose singular)", self.name()));
        }
        let conv = self.convention();
        let kb = self.k_right(&conv.invert(x)?)?;
        let r = self.r_matrix(&conv.reflect_compose(x, x))?;
        let rt = partial_transpose(&r, Leg::Second)?;
        let inv = rt
            .try_inverse()
            .ok_or_else(|| Error::Pole("partial transpose of R at the doubled argument is singular".into()))?;
        let m = partial_transpose(&inv, Leg::Second)?;
        let full = &(&kb.kron(&Mat::identity(2)) * &m) * &permutation_op();
        Ok(partial_trace_first(&full)?)
    }

    /// `K̄₁(x) = tr₀( K̃₀(1/x) R₀₁(1/x²) P₀₁ )`, additive analog for SSEP.
    pub fn kbar_from_ktilde<S: Field>(&self, x: &S) -> Result<Mat<S>> {
        if self.kind == ModelKind::Tasep {
            return Err(Error::unsupported("the dual boundary map (partial transpose singular)", self.name()));
        }
        let conv = self.convention();
        let kt = self.k_dual(&conv.invert(x)?)?;
        let r = self.r_matrix(&conv.invert(&conv.reflect_compose(x, x))?)?;
        let full = &(&kt.kron(&Mat::identity(2)) * &r) * &permutation_op();
        Ok(partial_trace_first(&full)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use exclusion_core::{derivative_at, rat, Dual};

    fn rates() -> Rates {
        Rates::new(int(1), int(1), rat(1, 2), rat(1, 3))
    }

    fn all_models() -> Vec<Model> {
        vec![
            Model::asep(rates(), int(2)).unwrap(),
            Model::tasep(int(1), int(1)),
            Model::ssep(rates()),
            Model::rd(rates(), int(3)).unwrap(),
        ]
    }

    #[test]
    fn asep_r_at_three() {
        let m = Model::asep(rates(), int(2)).unwrap();
        let r = m.r_matrix(&int(3)).unwrap();
        let expect = Mat::from_rows(vec![
            vec![int(1), int(0), int(0), int(0)],
            vec![int(0), rat(4, 5), rat(3, 5), int(0)],
            vec![int(0), rat(1, 5), rat(2, 5), int(0)],
            vec![int(0), int(0), int(0), int(1)],
        ]);
        assert_eq!(r, expect);
    }

    #[test]
    fn tasep_r_at_two() {
        let r = Model::tasep(int(1), int(1)).r_matrix(&int(2)).unwrap();
        assert_eq!(r, Mat::from_ints(&[&[1, 0, 0, 0], &[0, 0, 2, 0], &[0, 1, -1, 0], &[0, 0, 0, 1]]));
    }

    #[test]
    fn regularity_everywhere() {
        for m in all_models() {
            let id: Rational = m.convention().identity_point();
            assert_eq!(m.r_matrix(&id).unwrap(), permutation_op(), "{}", m.name());
            assert_eq!(m.k_matrix(BoundaryKind::K, &id).unwrap(), Mat::identity(2), "{}", m.name());
            assert_eq!(m.k_matrix(BoundaryKind::Kbar, &id).unwrap(), Mat::identity(2), "{}", m.name());
        }
    }

    #[test]
    fn explicit_local_operators() {
        let s = Model::ssep(rates()).local_operators();
        assert_eq!(s.w, &permutation_op::<Rational>() - &Mat::identity(4));
        let t = Model::tasep(rat(1, 2), int(1)).local_operators();
        assert_eq!(t.b, Mat::from_rows(vec![vec![rat(-1, 2), int(0)], vec![rat(1, 2), int(0)]]));
        let rd = Model::rd(rates(), int(3)).unwrap().local_operators();
        assert_eq!(rd.w.get(0, 0), &int(-1));
        assert_eq!(rd.w.get(1, 1), &int(-9));
        assert_eq!(rd.w.get(1, 2), &int(9));
        assert_eq!(rd.w.get(3, 0), &int(1));
    }

    #[test]
    fn ssep_k_example() {
        let m = Model::ssep(Rates::new(int(1), int(1), int(0), int(0)));
        assert_eq!(m.k_matrix(BoundaryKind::K, &int(1)).unwrap(), Mat::from_ints(&[&[0, 0], &[1, 1]]));
    }

    #[test]
    fn tasep_ktilde_example() {
        let m = Model::tasep(int(1), rat(1, 2));
        let kt = m.k_matrix(BoundaryKind::Ktilde, &int(2)).unwrap();
        assert_eq!(kt, Mat::from_rows(vec![vec![rat(1, 3), rat(1, 3)], vec![int(0), rat(2, 3)]]));
    }

    #[test]
    fn local_jump_and_boundary_derivatives() {
        for m in all_models() {
            let id: Rational = m.convention().identity_point();
            let ops = m.local_operators();
            let rho = m.rho();
            let dr = derivative_at(|x: &Dual| m.r_matrix(x), &id).unwrap();
            assert_eq!(&permutation_op::<Rational>() * &dr, ops.w.scale(&rho), "{}", m.name());
            let dk = derivative_at(|x: &Dual| m.k_matrix(BoundaryKind::K, x), &id).unwrap();
            assert_eq!(dk, ops.b.scale(&(int(2) * &rho)), "{}", m.name());
            let dkb = derivative_at(|x: &Dual| m.k_matrix(BoundaryKind::Kbar, x), &id).unwrap();
            assert_eq!(dkb, ops.bbar.scale(&(int(-2) * &rho)), "{}", m.name());
        }
    }

    #[test]
    fn closed_form_ktilde_equals_map_exactly() {
        let asep = Model::asep(rates(), int(2)).unwrap();
        let ssep = Model::ssep(rates());
        for x in [int(3), rat(-2, 5), rat(7, 4)] {
            for m in [&asep, &ssep] {
                assert_eq!(m.ktilde_from_kbar(&x).unwrap(), m.k_matrix(BoundaryKind::Ktilde, &x).unwrap());
            }
        }
    }

    #[test]
    fn rd_ktilde_is_regular_at_one_with_unit_trace() {
        let m = Model::rd(rates(), int(3)).unwrap();
        let kt = m.k_matrix(BoundaryKind::Ktilde, &int(1)).unwrap();
        assert_eq!(kt.trace(), int(1));
        assert!(m.ktilde_from_kbar(&int(1)).is_err());
    }

    #[test]
    fn markov_vector_examples() {
        let asep = Model::asep(rates(), int(2)).unwrap();
        assert_eq!(asep.markov_vector(&int(3)).unwrap(), [int(3), int(1)]);
        assert_eq!(Model::ssep(rates()).markov_vector(&int(5)).unwrap(), [int(1), int(1)]);
        assert!(Model::rd(rates(), int(3)).unwrap().markov_vector(&int(2)).is_err());
    }

    #[test]
    fn asep_crossing_scalar() {
        let asep = Model::asep(rates(), int(2)).unwrap();
        assert_eq!(asep.crossing_lambda(&int(3)).unwrap(), rat(22, 25));
    }

    #[test]
    fn poles_are_named() {
        let asep = Model::asep(rates(), int(2)).unwrap();
        let err = asep.r_matrix(&rat(1, 2)).unwrap_err();
        assert!(err.to_string().contains("qx − 1"));
        assert!(Model::ssep(rates()).r_matrix(&int(-1)).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(Model::asep(rates(), int(1)).is_err());
        assert!(Model::rd(rates(), int(-1)).is_err());
        assert!(Model::rd(rates(), int(0)).is_err());
    }
}
