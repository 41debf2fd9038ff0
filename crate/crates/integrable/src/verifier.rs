//! Exact pointwise verification of the bulk and boundary identities.
//!
//! Every check evaluates both sides of an identity at rational points and
//! compares them entry by entry with no tolerance.

use std::fmt;

use exclusion_core::{
    derivative_at, embed_pair, exact_nullspace, int, partial_trace_first, partial_transpose, permutation_op, swap_legs,
    Dual, Field, Leg, Mat, Rational, SparseMat,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{BoundaryKind, Model, ModelKind, Rates};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub row: usize,
    pub col: usize,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SkipReason {
    /// The sampled point hits a denominator zero.
    Pole(String),
    /// The identity does not exist for this model.
    Unsupported(String),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::Pole(s) => write!(f, "pole: {s}"),
            SkipReason::Unsupported(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail { witness: Option<Witness>, message: String },
    Skipped(SkipReason),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail { .. } => "fail",
            Status::Skipped(_) => "skipped",
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Status::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Status::Fail { .. })
    }

    pub(crate) fn fail(message: impl Into<String>) -> Self {
        Status::Fail { witness: None, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub model: String,
    pub check: String,
    pub points: Vec<String>,
    pub status: Status,
    /// Extra measured information (e.g. a normalization constant).
    pub detail: Option<String>,
}

impl CheckReport {
    pub fn new(model: &str, check: &str, points: Vec<String>, status: Status) -> Self {
        CheckReport { model: model.to_string(), check: check.to_string(), points, status, detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// Runs `f`, turning pole and unsupported errors into `Skipped`.
    pub fn run(model: &str, check: &str, points: Vec<String>, f: impl FnOnce() -> Result<Status>) -> Self {
        let status = match f() {
            Ok(s) => s,
            Err(e) => status_from_error(e),
        };
        CheckReport::new(model, check, points, status)
    }
}

pub fn status_from_error(e: Error) -> Status {
    match e {
        Error::Pole(s) => Status::Skipped(SkipReason::Pole(s)),
        Error::Unsupported { what, .. } => Status::Skipped(SkipReason::Unsupported(what)),
        other => Status::fail(other.to_string()),
    }
}

/// Exact entrywise comparison.
pub fn compare<S: Field>(lhs: &Mat<S>, rhs: &Mat<S>) -> Status {
    if (lhs.rows(), lhs.cols()) != (rhs.rows(), rhs.cols()) {
        return Status::fail(format!(
            "shape {}x{} vs {}x{}",
            lhs.rows(),
            lhs.cols(),
            rhs.rows(),
            rhs.cols()
        ));
    }
    match lhs.first_mismatch(rhs) {
        None => Status::Pass,
        Some((r, c)) => Status::Fail {
            witness: Some(Witness { row: r, col: c, lhs: lhs.get(r, c).to_string(), rhs: rhs.get(r, c).to_string() }),
            message: "entries differ".into(),
        },
    }
}

pub fn compare_sparse<S: Field>(lhs: &SparseMat<S>, rhs: &SparseMat<S>) -> Status {
    match lhs.first_mismatch(rhs) {
        None => Status::Pass,
        Some((r, c, a, b)) => Status::Fail {
            witness: Some(Witness { row: r, col: c, lhs: a.to_string(), rhs: b.to_string() }),
            message: "entries differ".into(),
        },
    }
}

pub fn compare_vec<S: Field>(lhs: &[S], rhs: &[S]) -> Status {
    compare(&Mat::column(lhs.to_vec()), &Mat::column(rhs.to_vec()))
}

fn pts(xs: &[&Rational]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn on_first<S: Field>(a: &Mat<S>) -> Mat<S> {
    a.kron(&Mat::identity(2))
}

fn on_second<S: Field>(a: &Mat<S>) -> Mat<S> {
    Mat::identity(2).kron(a)
}

fn inverse(m: &Mat<Rational>, what: &str) -> Result<Mat<Rational>> {
    m.try_inverse().ok_or_else(|| Error::Pole(format!("{what} is singular")))
}

fn prod(ms: &[&Mat<Rational>]) -> Mat<Rational> {
    let (first, rest) = ms.split_first().expect("nonempty product");
    rest.iter().fold((*first).clone(), |acc, m| &acc * m)
}

/// `R₁₂(c(x₁,x₂)) R₁₃(c(x₁,x₃)) R₂₃(c(x₂,x₃)) = R₂₃ R₁₃ R₁₂` on three sites.
pub fn check_yang_baxter(model: &Model, x1: &Rational, x2: &Rational, x3: &Rational) -> CheckReport {
    CheckReport::run(model.name(), "yang_baxter", pts(&[x1, x2, x3]), || {
        let conv = model.convention();
        let r12 = model.r_matrix(&conv.compose(x1, x2)?)?;
        let r13 = model.r_matrix(&conv.compose(x1, x3)?)?;
        let r23 = model.r_matrix(&conv.compose(x2, x3)?)?;
        let a = embed_pair(&r12, 0, 1, 3)?;
        let b = embed_pair(&r13, 0, 2, 3)?;
        let c = embed_pair(&r23, 1, 2, 3)?;
        Ok(compare_sparse(&a.matmul(&b).matmul(&c), &c.matmul(&b).matmul(&a)))
    })
}

/// Unitarity, regularity, crossing unitarity, local jump operator and the two
/// Markovian properties of `R`. The second point `y` enters only the Markovian
/// vector identity `R(c(x,y)) v(x)⊗v(y) = v(x)⊗v(y)`.
pub fn check_r_properties(model: &Model, x: &Rational, y: &Rational) -> Vec<CheckReport> {
    let name = model.name();
    let conv = model.convention();
    let id: Rational = conv.identity_point();
    vec![
        CheckReport::run(name, "r.unitarity", pts(&[x]), || {
            let r = model.r_matrix(x)?;
            let r21 = swap_legs(&model.r_matrix(&conv.invert(x)?)?)?;
            Ok(compare(&(&r * &r21), &Mat::identity(4)))
        }),
        CheckReport::run(name, "r.regularity", pts(&[&id]), || Ok(compare(&model.r_matrix(&id)?, &permutation_op()))),
        CheckReport::run(name, "r.crossing", pts(&[x]), || {
            let u = on_second(&model.crossing_u()?);
            let lhs = prod(&[
                &partial_transpose(&model.r_matrix(x)?, Leg::Second)?,
                &u,
                &partial_transpose(&swap_legs(&model.r_matrix(&model.cross_shift(x)?)?)?, Leg::Second)?,
                &inverse(&u, "U")?,
            ]);
            let lambda = model.crossing_lambda(x)?;
            Ok(compare(&lhs, &Mat::identity(4).scale(&lambda)))
        }),
        CheckReport::run(name, "r.local_jump", pts(&[&id]), || {
            let dr = derivative_at(|t: &Dual| model.r_matrix(t), &id)?;
            let w = model.local_operators().w;
            Ok(compare(&(&permutation_op() * &dr), &w.scale(&model.rho())))
        }),
        CheckReport::run(name, "r.markov_columns", pts(&[x]), || {
            let ones = vec![int(1); 4];
            Ok(compare_vec(&model.r_matrix(x)?.vec_mul(&ones), &ones))
        }),
        CheckReport::run(name, "r.markov_vector", pts(&[x, y]), || {
            let vx = model.markov_vector(x)?;
            let vy = model.markov_vector(y)?;
            let v = Mat::column(vx.to_vec()).kron(&Mat::column(vy.to_vec()));
            let r = model.r_matrix(&conv.compose(x, y)?)?;
            Ok(compare(&(&r * &v), &v))
        }),
    ]
}

fn reflection_identity(
    model: &Model,
    k: impl Fn(&Rational) -> Result<Mat<Rational>>,
    x1: &Rational,
    x2: &Rational,
) -> Result<Status> {
    let conv = model.convention();
    let c = conv.compose(x1, x2)?;
    let rc = conv.reflect_compose(x1, x2);
    let r_c = model.r_matrix(&c)?;
    let r_rc = model.r_matrix(&rc)?;
    let k1 = on_first(&k(x1)?);
    let k2 = on_second(&k(x2)?);
    let lhs = prod(&[&r_c, &k1, &swap_legs(&r_rc)?, &k2]);
    let rhs = prod(&[&k2, &r_rc, &k1, &swap_legs(&r_c)?]);
    Ok(compare(&lhs, &rhs))
}

/// Reflection equation for `K`, its `K̄` form, or the dual equation for `K̃`.
pub fn check_reflection(model: &Model, kind: BoundaryKind, x1: &Rational, x2: &Rational) -> CheckReport {
    let check = format!("reflection.{}", kind.name());
    CheckReport::run(model.name(), &check, pts(&[x1, x2]), || match kind {
        BoundaryKind::K => reflection_identity(model, |x| model.k_matrix(BoundaryKind::K, x), x1, x2),
        BoundaryKind::Kbar => {
            let conv = model.convention();
            let c = conv.compose(x2, x1)?;
            let irc = conv.invert(&conv.reflect_compose(x1, x2))?;
            let r_c = model.r_matrix(&c)?;
            let r_irc = model.r_matrix(&irc)?;
            let k1 = on_first(&model.k_matrix(BoundaryKind::Kbar, x1)?);
            let k2 = on_second(&model.k_matrix(BoundaryKind::Kbar, x2)?);
            let lhs = prod(&[&swap_legs(&r_c)?, &k1, &r_irc, &k2]);
            let rhs = prod(&[&k2, &swap_legs(&r_irc)?, &k1, &r_c]);
            Ok(compare(&lhs, &rhs))
        }
        BoundaryKind::Ktilde => {
            if model.kind() == ModelKind::Tasep {
                return Err(Error::unsupported("dual reflection equation (partial transpose singular)", model.name()));
            }
            let conv = model.convention();
            let c = conv.compose(x2, x1)?;
            let rc = conv.reflect_compose(x1, x2);
            let r_c = model.r_matrix(&c)?;
            let r_rc = model.r_matrix(&rc)?;
            let k1 = on_first(&model.k_matrix(BoundaryKind::Ktilde, x1)?);
            let k2 = on_second(&model.k_matrix(BoundaryKind::Ktilde, x2)?);
            let left_mid = partial_transpose(
                &inverse(&partial_transpose(&swap_legs(&r_rc)?, Leg::First)?, "R21^t1")?,
                Leg::First,
            )?;
            let right_mid =
                partial_transpose(&inverse(&partial_transpose(&r_rc, Leg::Second)?, "R12^t2")?, Leg::Second)?;
            let lhs = prod(&[&k2, &left_mid, &k1, &swap_legs(&r_c)?]);
            let rhs = prod(&[&r_c, &k1, &right_mid, &k2]);
            Ok(compare(&lhs, &rhs))
        }
    })
}

/// Reflection equation for the twisted ASEP boundary matrix.
pub fn check_twisted_reflection(model: &Model, tau: &Rational, x1: &Rational, x2: &Rational) -> CheckReport {
    CheckReport::run(model.name(), "reflection.K_twisted", pts(&[tau, x1, x2]), || {
        reflection_identity(model, |x| model.twisted_k(tau, x), x1, x2)
    })
}

/// Kernel of `K(x) − I`, normalized so its entries sum to one.
fn markov_fixed_vector(k: &Mat<Rational>) -> Result<Vec<Rational>> {
    let kernel = exact_nullspace(&SparseMat::from_dense(&(k - &Mat::identity(2))));
    if kernel.len() != 1 {
        return Err(Error::Internal(format!("fixed space of K has dimension {}", kernel.len())));
    }
    let v = &kernel[0];
    let s = &v[0] + &v[1];
    if Field::is_zero(&s) {
        return Err(Error::Internal("fixed vector of K has zero total weight".into()));
    }
    Ok(v.iter().map(|e| e / &s).collect())
}

fn k_property_reports(
    model: &Model,
    label: &str,
    k: &dyn Fn(&Rational) -> Result<Mat<Rational>>,
    kd: &dyn Fn(&Dual) -> Result<Mat<Dual>>,
    jump: Result<Mat<Rational>>,
    markov: bool,
    x: &Rational,
    extra_points: &[&Rational],
) -> Vec<CheckReport> {
    let name = model.name();
    let conv = model.convention();
    let id: Rational = conv.identity_point();
    let with = |p: &[&Rational]| {
        let mut v = pts(extra_points);
        v.extend(pts(p));
        v
    };
    let mut out = vec![
        CheckReport::run(name, &format!("{label}.unitarity"), with(&[x]), || {
            Ok(compare(&(&k(x)? * &k(&conv.invert(x)?)?), &Mat::identity(2)))
        }),
        CheckReport::run(name, &format!("{label}.regularity"), with(&[&id]), || Ok(compare(&k(&id)?, &Mat::identity(2)))),
        CheckReport::run(name, &format!("{label}.boundary_jump"), with(&[&id]), || {
            let d = derivative_at(kd, &id)?;
            Ok(compare(&d, &jump?))
        }),
    ];
    if markov {
        out.push(CheckReport::run(name, &format!("{label}.markov_columns"), with(&[x]), || {
            let ones = vec![int(1); 2];
            Ok(compare_vec(&k(x)?.vec_mul(&ones), &ones))
        }));
        out.push(CheckReport::run(name, &format!("{label}.markov_vector"), with(&[x]), || {
            let kx = k(x)?;
            let u_x = markov_fixed_vector(&kx)?;
            let u_inv = markov_fixed_vector(&k(&conv.invert(x)?)?)?;
            Ok(compare_vec(&kx.mul_vec(&u_inv), &u_x))
        }));
    } else {
        for check in ["markov_columns", "markov_vector"] {
            out.push(CheckReport::new(
                name,
                &format!("{label}.{check}"),
                with(&[x]),
                Status::Skipped(SkipReason::Unsupported("the twisted boundary is not Markovian".into())),
            ));
        }
    }
    out
}

/// Unitarity, regularity, boundary jump operator (`K′ = 2ρB`, `K̄′ = −2ρB̄`) and
/// Markovian properties of `K` or `K̄`.
pub fn check_k_properties(model: &Model, kind: BoundaryKind, x: &Rational) -> Vec<CheckReport> {
    let ops = model.local_operators();
    let two_rho = int(2) * model.rho();
    let jump = match kind {
        BoundaryKind::K => ops.b.scale(&two_rho),
        BoundaryKind::Kbar => ops.bbar.scale(&(-two_rho)),
        BoundaryKind::Ktilde => {
            return vec![CheckReport::new(
                model.name(),
                "Ktilde.properties",
                pts(&[x]),
                Status::Skipped(SkipReason::Unsupported("unitarity/regularity are stated for K and Kbar".into())),
            )]
        }
    };
    k_property_reports(
        model,
        kind.name(),
        &|t: &Rational| model.k_matrix(kind, t),
        &|t: &Dual| model.k_matrix(kind, t),
        Ok(jump),
        true,
        x,
        &[],
    )
}

/// Same properties for the twisted ASEP `K`; the Markovian rows are reported as skipped.
pub fn check_twisted_k_properties(model: &Model, tau: &Rational, x: &Rational) -> Vec<CheckReport> {
    let jump = model.twisted_b(tau).map(|b| b.scale(&(int(2) * model.rho())));
    k_property_reports(
        model,
        "K_twisted",
        &|t: &Rational| model.twisted_k(tau, t),
        &|t: &Dual| model.twisted_k(tau, t),
        jump,
        false,
        x,
        &[tau],
    )
}

/// The closed-form `K̃` against the map from `K̄`, and the inverse map back to `K̄`.
pub fn check_boundary_maps(model: &Model, x: &Rational) -> Vec<CheckReport> {
    let name = model.name();
    let closed = if model.kind() == ModelKind::Rd {
        CheckReport::new(
            name,
            "ktilde.map_vs_closed_form",
            pts(&[x]),
            Status::Skipped(SkipReason::Unsupported("no closed-form Ktilde; the map defines it".into())),
        )
    } else {
        CheckReport::run(name, "ktilde.map_vs_closed_form", pts(&[x]), || {
            Ok(compare(&model.ktilde_from_kbar(x)?, &model.k_matrix(BoundaryKind::Ktilde, x)?))
        })
    };
    vec![
        closed,
        CheckReport::run(name, "kbar.roundtrip", pts(&[x]), || {
            Ok(compare(&model.kbar_from_ktilde(x)?, &model.k_matrix(BoundaryKind::Kbar, x)?))
        }),
    ]
}

fn rat_mat(rows: &[&[i64]]) -> Mat<Rational> {
    Mat::from_ints(rows)
}

/// Symmetry relations of the SSEP and ASEP R- and K-matrices used to derive
/// the transfer-matrix eigenvalue.
pub fn check_named_symmetries(model: &Model, x: &Rational) -> Vec<CheckReport> {
    match model.kind() {
        ModelKind::Ssep => ssep_symmetries(model, x),
        ModelKind::Asep => asep_symmetries(model, x),
        _ => vec![CheckReport::new(
            model.name(),
            "symmetries",
            pts(&[x]),
            Status::Skipped(SkipReason::Unsupported("named symmetries are listed for SSEP and ASEP".into())),
        )],
    }
}

fn ssep_symmetries(model: &Model, x: &Rational) -> Vec<CheckReport> {
    let name = model.name();
    let v = rat_mat(&[&[0, 1], &[-1, 0]]);
    let swapped = model.with_rates(model.rates().mirrored());
    let Rates { beta, delta, .. } = model.rates().clone();
    vec![
        CheckReport::run(name, "sym.pt", pts(&[x]), || {
            let r = model.r_matrix(x)?;
            let t12 = partial_transpose(&partial_transpose(&r, Leg::First)?, Leg::Second)?;
            let r21 = swap_legs(&r)?;
            match compare(&t12, &r21) {
                Status::Pass => Ok(compare(&r21, &r)),
                fail => Ok(fail),
            }
        }),
        CheckReport::run(name, "sym.crossing_r", pts(&[x]), || {
            let x1 = x + int(1);
            if Field::is_zero(&x1) {
                return Err(Error::Pole("x + 1".into()));
            }
            let scale = x / &x1;
            let v1 = on_first(&v);
            let rhs = prod(&[&v1, &partial_transpose(&model.r_matrix(&-&x1)?, Leg::Second)?, &inverse(&v1, "V")?]);
            Ok(compare(&model.r_matrix(x)?, &rhs.scale(&scale)))
        }),
        CheckReport::run(name, "sym.crossing_ktilde", pts(&[x]), || {
            let x1 = x + int(1);
            let s = &delta + &beta;
            let den = int(2) * &x1 * (x * &s + int(1));
            if Field::is_zero(&den) {
                return Err(Error::Pole("2(x+1)(x(δ+β)+1)".into()));
            }
            let scale = -(int(2) * x + int(1)) * (&x1 * &s - int(1)) / den;
            let k = swapped.k_matrix(BoundaryKind::K, &-&x1)?;
            let rhs = prod(&[&v, &k.transpose(), &inverse(&v, "V")?]).scale(&scale);
            Ok(compare(&model.k_matrix(BoundaryKind::Ktilde, x)?, &rhs))
        }),
        CheckReport::run(name, "sym.duality", pts(&[x]), || {
            let kt = model.k_matrix(BoundaryKind::Ktilde, x)?;
            let r = model.r_matrix(&(int(2) * x))?;
            let rhs = partial_trace_first(&prod(&[&on_first(&kt), &r, &permutation_op()]))?;
            Ok(compare(&swapped.k_matrix(BoundaryKind::K, x)?, &rhs))
        }),
    ]
}

fn asep_symmetries(model: &Model, x: &Rational) -> Vec<CheckReport> {
    let name = model.name();
    let q = model.q().clone();
    let m = Mat::diag(&[q.clone(), int(1)]);
    let v = Mat::from_rows(vec![vec![int(0), int(-1)], vec![q.clone(), int(0)]]);
    let w = rat_mat(&[&[0, 1], &[1, 0]]);
    let Rates { beta, delta, .. } = model.rates().clone();
    // K with α → β, γ → δ
    let substituted = model.with_rates(Rates::new(beta.clone(), beta.clone(), delta.clone(), delta.clone()));
    let both = |a: &Mat<Rational>| on_first(a).matmul(&on_second(a));
    vec![
        CheckReport::run(name, "sym.t", pts(&[x]), || {
            let r = model.r_matrix(x)?;
            let lhs = partial_transpose(&partial_transpose(&r, Leg::First)?, Leg::Second)?;
            let rhs = prod(&[&on_first(&m), &swap_legs(&r)?, &on_second(&inverse(&m, "M")?)]);
            Ok(compare(&lhs, &rhs))
        }),
        CheckReport::run(name, "sym.p_v", pts(&[x]), || {
            let r = model.r_matrix(x)?;
            let vv = both(&v);
            Ok(compare(&swap_legs(&r)?, &prod(&[&vv, &r, &inverse(&vv, "V⊗V")?])))
        }),
        CheckReport::run(name, "sym.p_w", pts(&[x]), || {
            let r = model.r_matrix(x)?;
            let ww = both(&w);
            Ok(compare(&swap_legs(&r)?, &prod(&[&ww, &r, &inverse(&ww, "W⊗W")?])))
        }),
        CheckReport::run(name, "sym.z2", pts(&[x]), || {
            let r = model.r_matrix(x)?;
            let mm = both(&m);
            Ok(compare(&r, &prod(&[&mm, &r, &inverse(&mm, "M⊗M")?])))
        }),
        CheckReport::run(name, "sym.crossing_r", pts(&[x]), || {
            let qx = &q * x;
            let den = &qx - int(1);
            if Field::is_zero(&den) || Field::is_zero(&qx) {
                return Err(Error::Pole("qx(qx − 1)".into()));
            }
            let scale = (x - int(1)) / den;
            let mv = on_first(&m).matmul(&on_first(&v));
            let rhs = prod(&[&mv, &partial_transpose(&model.r_matrix(&qx.recip())?, Leg::Second)?, &inverse(&on_first(&v), "V")?]);
            Ok(compare(&model.r_matrix(x)?, &rhs.scale(&scale)))
        }),
        CheckReport::run(name, "sym.crossing_ktilde", pts(&[x]), || {
            let qx = &q * x;
            if Field::is_zero(&qx) {
                return Err(Error::Pole("qx".into()));
            }
            let kt = model.k_matrix(BoundaryKind::Ktilde, &qx.recip())?;
            let lhs = prod(&[&v.transpose(), &kt.transpose(), &inverse(&v, "V")?]);
            let x2 = x * x;
            let num = (&q * &x2 - int(1)) * ((x - int(1)) * (x * &delta + &beta) + x * (&q - int(1)));
            let den = (&x2 - int(1)) * ((&qx - int(1)) * (&qx * &beta + &delta) + &qx * (int(1) - &q));
            if Field::is_zero(&den) {
                return Err(Error::Pole("crossing prefactor of Ktilde".into()));
            }
            let k = substituted.k_matrix(BoundaryKind::K, x)?;
            let rhs = prod(&[&m, &w, &k, &inverse(&w, "W")?]).scale(&(num / den));
            Ok(compare(&lhs, &rhs))
        }),
        CheckReport::run(name, "sym.duality", pts(&[x]), || {
            // R₀₁ is taken at x·x, the multiplicative counterpart of the additive 2x.
            let kt = model.k_matrix(BoundaryKind::Ktilde, x)?;
            let r = model.r_matrix(&(x * x))?;
            let rhs = partial_trace_first(&prod(&[&on_first(&kt), &r, &permutation_op()]))?;
            let k = substituted.k_matrix(BoundaryKind::K, x)?;
            let lhs = prod(&[&w, &k, &inverse(&w, "W")?]);
            Ok(compare(&lhs, &rhs))
        }),
    ]
}

/// One set of sample arguments for the identity suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub x1: Rational,
    pub x2: Rational,
    pub x3: Rational,
}

/// Twist used for the generalized ASEP boundary in the suite.
pub fn default_twist() -> Rational {
    int(2)
}

/// Every identity applicable to `model` at one sample point.
pub fn suite_at(model: &Model, p: &SamplePoint) -> Vec<CheckReport> {
    let SamplePoint { x1, x2, x3 } = p;
    let mut out = vec![check_yang_baxter(model, x1, x2, x3)];
    out.extend(check_r_properties(model, x1, x2));
    for kind in [BoundaryKind::K, BoundaryKind::Kbar, BoundaryKind::Ktilde] {
        out.push(check_reflection(model, kind, x1, x2));
    }
    out.extend(check_k_properties(model, BoundaryKind::K, x1));
    out.extend(check_k_properties(model, BoundaryKind::Kbar, x1));
    out.extend(check_boundary_maps(model, x1));
    out.extend(check_named_symmetries(model, x1));
    if model.kind() == ModelKind::Asep {
        let tau = default_twist();
        out.push(check_twisted_reflection(model, &tau, x1, x2));
        out.extend(check_twisted_k_properties(model, &tau, x1));
    }
    out
}

/// Runs the suite at every point; reports keep point order, then check order.
pub fn run_suite(model: &Model, points: &[SamplePoint]) -> Vec<CheckReport> {
    points.par_iter().map(|p| suite_at(model, p)).collect::<Vec<_>>().into_iter().flatten().collect()
}

/// Uniform rational with numerator in [−12, 12] and denominator in [1, 12].
pub fn sample_rational(rng: &mut impl Rng) -> Rational {
    let n: i64 = rng.gen_range(-12..=12);
    let d: i64 = rng.gen_range(1..=12);
    Rational::new(n.into(), d.into())
}

/// Seeded sample points at which no identity of the suite meets a pole.
pub fn sample_points(model: &Model, seed: u64, count: usize) -> Result<Vec<SamplePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 200 * (count + 1) {
            return Err(Error::Internal(format!("could not find {count} pole-free sample points")));
        }
        let p = SamplePoint {
            x1: sample_rational(&mut rng),
            x2: sample_rational(&mut rng),
            x3: sample_rational(&mut rng),
        };
        if admissible(model, &p) {
            out.push(p);
        }
    }
    Ok(out)
}

fn admissible(model: &Model, p: &SamplePoint) -> bool {
    !suite_at(model, p)
        .iter()
        .any(|r| matches!(r.status, Status::Skipped(SkipReason::Pole(_))))
}
