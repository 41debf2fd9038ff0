//! Double-row transfer matrices and the identities they satisfy.

use exclusion_core::{
    embed_pair, embed_sites, exact_nullspace, int, partial_trace_first_sparse, Dual, Field, Mat, Rational, SparseMat,
};

use crate::error::{Error, Result};
use crate::markov::build_markov;
use crate::models::{BoundaryKind, Model, ModelKind};
use crate::verifier::{compare, compare_sparse, compare_vec, CheckReport, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// No prefactor.
    Unnormalized,
    /// Divided by `tr K̃(identity point)`.
    HomogeneousWithTrace,
}

#[derive(Clone, Debug)]
pub struct TransferSpec {
    pub model: Model,
    pub l: usize,
    pub thetas: Vec<Rational>,
    pub normalization: Normalization,
}

impl TransferSpec {
    /// All inhomogeneities at the identity point, trace-normalized.
    pub fn homogeneous(model: Model, l: usize) -> Self {
        let id = model.convention().identity_point();
        TransferSpec { model, l, thetas: vec![id; l], normalization: Normalization::HomogeneousWithTrace }
    }

    pub fn inhomogeneous(model: Model, thetas: Vec<Rational>) -> Self {
        TransferSpec { model, l: thetas.len(), thetas, normalization: Normalization::Unnormalized }
    }

    /// The scalar multiplying the trace: `1` or `1/tr K̃(identity point)`.
    pub fn prefactor(&self) -> Result<Rational> {
        match self.normalization {
            Normalization::Unnormalized => Ok(int(1)),
            Normalization::HomogeneousWithTrace => {
                let id: Rational = self.model.convention().identity_point();
                let tr = self.model.k_matrix(BoundaryKind::Ktilde, &id)?.trace();
                tr.try_inv().ok_or_else(|| Error::ZeroNormalization("tr Ktilde at the identity point".into()))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.l == 0 || self.thetas.len() != self.l {
            return Err(Error::InvalidParameter(format!("{} inhomogeneities for L = {}", self.thetas.len(), self.l)));
        }
        Ok(())
    }
}

fn in_factor(what: String) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Pole(s) => Error::Pole(format!("{s} (in {what})")),
        other => other,
    }
}

/// `tr₀( K̃₀ R₀L(c(x,θ_L))…R₀1(c(x,θ₁)) K₀ R₁0(rc(x,θ₁))…R_L0(rc(x,θ_L)) )`
/// with arbitrary 2×2 boundary matrices, unnormalized.
pub fn assemble_transfer<S: Field>(
    model: &Model,
    thetas: &[Rational],
    kt: &Mat<S>,
    k: &Mat<S>,
    x: &S,
) -> Result<SparseMat<S>> {
    let l = thetas.len();
    let n = l + 1;
    let conv = model.convention();
    let mut t = embed_sites(kt, &[0], n)?;
    for j in (1..=l).rev() {
        let th = S::from_rational(&thetas[j - 1]);
        let r = conv.compose(x, &th).and_then(|c| model.r_matrix(&c)).map_err(in_factor(format!("R_0{j}")))?;
        t = t.matmul(&embed_pair(&r, 0, j, n)?);
    }
    t = t.matmul(&embed_sites(k, &[0], n)?);
    for j in 1..=l {
        let th = S::from_rational(&thetas[j - 1]);
        let r = model.r_matrix(&conv.reflect_compose(x, &th)).map_err(in_factor(format!("R_{j}0")))?;
        t = t.matmul(&embed_pair(&r, j, 0, n)?);
    }
    Ok(partial_trace_first_sparse(&t)?)
}

/// The transfer matrix of `spec` at `x`, over any scalar field.
pub fn build_transfer<S: Field>(spec: &TransferSpec, x: &S) -> Result<SparseMat<S>> {
    spec.validate()?;
    let kt = spec.model.k_matrix(BoundaryKind::Ktilde, x).map_err(in_factor("Ktilde".into()))?;
    let k = spec.model.k_matrix(BoundaryKind::K, x).map_err(in_factor("K".into()))?;
    let t = assemble_transfer(&spec.model, &spec.thetas, &kt, &k, x)?;
    Ok(t.scale(&S::from_rational(&spec.prefactor()?)))
}

fn points(xs: &[&Rational]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn spec_detail(spec: &TransferSpec) -> String {
    let th: Vec<String> = spec.thetas.iter().map(|t| t.to_string()).collect();
    format!("L={} theta=[{}]", spec.l, th.join(","))
}

/// `[t(x), t(x′)] = 0`.
pub fn check_commutation(spec: &TransferSpec, x: &Rational, x2: &Rational) -> CheckReport {
    CheckReport::run(spec.model.name(), "transfer.commutation", points(&[x, x2]), || {
        let a = build_transfer(spec, x)?;
        let b = build_transfer(spec, x2)?;
        Ok(compare_sparse(&a.matmul(&b), &b.matmul(&a)))
    })
    .with_detail(spec_detail(spec))
}

/// `(1/2ρ) t′(identity point) = M` for the homogeneous transfer matrix.
pub fn markov_from_transfer(model: &Model, l: usize) -> CheckReport {
    let spec = TransferSpec::homogeneous(model.clone(), l);
    let id: Rational = model.convention().identity_point();
    let prefactor = spec.prefactor().map(|p| p.to_string()).unwrap_or_else(|e| e.to_string());
    CheckReport::run(model.name(), "transfer.markov_derivative", vec![id.to_string()], || {
        let t = build_transfer(&spec, &Dual::variable(id.clone()))?;
        let dt = t.map(|d| d.deriv.clone());
        let scale = (int(2) * model.rho()).recip();
        Ok(compare_sparse(&dt.scale(&scale), &build_markov(model, l)?))
    })
    .with_detail(format!("L={l} normalization={prefactor}"))
}

/// Closed-form eigenvalue for SSEP (additive θ) and ASEP (multiplicative θ).
pub fn lambda_eigenvalue(model: &Model, x: &Rational, thetas: &[Rational]) -> Result<Rational> {
    let r = model.rates();
    let one = int(1);
    let nz = |v: Rational, what: &str| -> Result<Rational> {
        if Field::is_zero(&v) {
            Err(Error::Pole(what.to_string()))
        } else {
            Ok(v)
        }
    };
    match model.kind() {
        ModelKind::Ssep => {
            let sb = &r.delta + &r.beta;
            let sa = &r.alpha + &r.gamma;
            let x1 = x + &one;
            let mut prod = int(1);
            for t in thetas {
                let den = nz(&x1 * &x1 - t * t, "(x+1)² − θ²")?;
                prod *= (x * x - t * t) / den;
            }
            let bound = (&x1 * &sb - &one) / nz(x * &sb + &one, "x(δ+β) + 1")?
                * ((&x1 * &sa - &one) / nz(x * &sa + &one, "x(α+γ) + 1")?);
            Ok(&one + bound * (x / nz(x1.clone(), "x + 1")?) * prod)
        }
        ModelKind::Asep => {
            let q = model.q();
            let qx = q * x;
            let right = (&qx - &one) * (&r.delta + &qx * &r.beta) + &qx * (&one - q);
            let right_den = nz((x - &one) * (x * &r.delta + &r.beta) + x * (q - &one), "right boundary factor")?;
            let left = (&qx - &one) * (&qx * &r.alpha + &r.gamma) + &qx * (&one - q);
            let left_den = nz((x - &one) * (&r.alpha + x * &r.gamma) + x * (q - &one), "left boundary factor")?;
            let qpow = match thetas.len() {
                0 => q.recip(),
                l => Field::pow(q, l as u32 - 1),
            };
            let bulk = (x * x - &one) / nz(&qx * &qx - &one, "q²x² − 1")?;
            let mut prod = int(1);
            for t in thetas {
                let den = nz((&qx - t) * (&qx * t - &one), "(qx − θ)(qxθ − 1)")?;
                prod *= (x - t) * (x * t - &one) / den;
            }
            Ok(&one + right / right_den * (left / left_den) * qpow * bulk * prod)
        }
        _ => Err(Error::unsupported("a closed-form eigenvalue", model.name())),
    }
}

/// Common kernel of `t(x) − λ(x)` at two spectral parameters.
pub fn lambda_eigenvector(spec: &TransferSpec, xs: [&Rational; 2]) -> Result<Vec<Rational>> {
    let dim = 1usize << spec.l;
    let mut triplets = Vec::new();
    for (block, x) in xs.iter().enumerate() {
        let lam = lambda_eigenvalue(&spec.model, x, &spec.thetas)?;
        let shifted = build_transfer(spec, *x)?.sub(&SparseMat::identity(dim).scale(&lam));
        triplets.extend(shifted.triplets().map(|(r, c, v)| (r + block * dim, c, v.clone())));
    }
    let stacked = SparseMat::from_triplets(2 * dim, dim, triplets)?;
    let mut kernel = exact_nullspace(&stacked);
    if kernel.len() != 1 {
        return Err(Error::KernelDimension(kernel.len()));
    }
    Ok(kernel.pop().expect("one vector"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `t(x) v = λ v` (right) or `vᵀ t(x) = λ vᵀ` (left), λ from the closed form.
pub fn check_eigenpair(spec: &TransferSpec, x: &Rational, v: &[Rational], side: Side) -> CheckReport {
    let check = match side {
        Side::Left => "transfer.left_eigenvector",
        Side::Right => "transfer.right_eigenvector",
    };
    CheckReport::run(spec.model.name(), check, points(&[x]), || {
        if v.iter().all(Field::is_zero) {
            return Err(Error::InvalidParameter("zero vector".into()));
        }
        let lam = lambda_eigenvalue(&spec.model, x, &spec.thetas)?;
        let t = build_transfer(spec, x)?;
        let tv = match side {
            Side::Left => t.vec_mul(v),
            Side::Right => t.mul_vec(v),
        };
        let lv: Vec<Rational> = v.iter().map(|e| e * &lam).collect();
        Ok(compare_vec(&tv, &lv))
    })
    .with_detail(spec_detail(spec))
}

/// The argument related to `x` by crossing: `−x−1` (SSEP) or `1/(qx)` (ASEP).
pub fn crossing_partner(model: &Model, x: &Rational) -> Result<Rational> {
    match model.kind() {
        ModelKind::Ssep => Ok(-x - int(1)),
        ModelKind::Asep => {
            let qx = model.q() * x;
            qx.try_inv().ok_or_else(|| Error::Pole("qx".into()))
        }
        _ => Err(Error::unsupported("transfer-matrix crossing relation", model.name())),
    }
}

/// `t(x) = (λ(x) − 1) t(x̂)` with `x̂` the crossing partner.
pub fn check_crossing_symmetry_t(spec: &TransferSpec, x: &Rational) -> CheckReport {
    CheckReport::run(spec.model.name(), "transfer.crossing", points(&[x]), || {
        let partner = crossing_partner(&spec.model, x)?;
        let lam = lambda_eigenvalue(&spec.model, x, &spec.thetas)?;
        let lhs = build_transfer(spec, x)?;
        let rhs = build_transfer(spec, &partner)?.scale(&(lam - int(1)));
        Ok(compare_sparse(&lhs, &rhs))
    })
    .with_detail(spec_detail(spec))
}

/// `Γ = [[−1, β], [1, δ]]`.
pub fn ssep_gamma(model: &Model) -> Mat<Rational> {
    let r = model.rates();
    Mat::from_rows(vec![vec![int(-1), r.beta.clone()], vec![int(1), r.delta.clone()]])
}

/// The triangular `D(x) = Γ⁻¹K(x)Γ` in closed form.
pub fn ssep_d(model: &Model, x: &Rational) -> Result<Mat<Rational>> {
    let r = model.rates();
    let sa = &r.alpha + &r.gamma;
    let den = x * &sa + int(1);
    if Field::is_zero(&den) {
        return Err(Error::Pole("x(α+γ) + 1".into()));
    }
    Ok(Mat::from_rows(vec![
        vec![-(x * &sa - int(1)) / &den, int(2) * x * (&r.alpha * &r.beta - &r.delta * &r.gamma) / &den],
        vec![int(0), int(1)],
    ]))
}

/// The diagonal `D̃(x) = Γ⁻¹K̃(x)Γ` in closed form.
pub fn ssep_dtilde(model: &Model, x: &Rational) -> Result<Mat<Rational>> {
    let r = model.rates();
    let sb = &r.beta + &r.delta;
    let x1 = x + int(1);
    let den = int(2) * &x1 * (x * &sb + int(1));
    if Field::is_zero(&den) {
        return Err(Error::Pole("2(x+1)(x(δ+β) + 1)".into()));
    }
    let s = (int(2) * x + int(1)) / den;
    Ok(Mat::diag(&[&s * (int(1) - &x1 * &sb), &s * (&x1 * &sb + int(1))]))
}

/// The three identities of the SSEP `Γ`-conjugated transfer matrix, plus the
/// conjugation itself.
pub fn ssep_conjugated(spec: &TransferSpec, x: &Rational) -> Vec<CheckReport> {
    let model = &spec.model;
    let name = model.name();
    if model.kind() != ModelKind::Ssep {
        return vec![CheckReport::run(name, "ssep.conjugation", vec![x.to_string()], || {
            Err(Error::unsupported("the Gamma conjugation", name))
        })];
    }
    let gamma = ssep_gamma(model);
    let gamma_inv = gamma.try_inverse();
    let conj = move |k: &Mat<Rational>| -> Result<Mat<Rational>> {
        let gi = gamma_inv
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("Gamma is singular (β + δ = 0)".into()))?;
        Ok(gi.matmul(k).matmul(&ssep_gamma(model)))
    };
    let pts = vec![x.to_string()];
    let d_conj = || conj(&model.k_matrix(BoundaryKind::K, x)?);
    let dt_conj = || conj(&model.k_matrix(BoundaryKind::Ktilde, x)?);
    vec![
        CheckReport::run(name, "ssep.D", pts.clone(), || Ok(compare(&d_conj()?, &ssep_d(model, x)?))),
        CheckReport::run(name, "ssep.Dtilde", pts.clone(), || Ok(compare(&dt_conj()?, &ssep_dtilde(model, x)?))),
        CheckReport::run(name, "ssep.conjugation", pts.clone(), || {
            let ts = assemble_transfer(model, &spec.thetas, &dt_conj()?, &d_conj()?, x)?;
            let t = assemble_transfer(
                model,
                &spec.thetas,
                &model.k_matrix(BoundaryKind::Ktilde, x)?,
                &model.k_matrix(BoundaryKind::K, x)?,
                x,
            )?;
            let g = SparseMat::from_dense(&(0..spec.l).fold(Mat::identity(1), |acc, _| acc.kron(&ssep_gamma(model))));
            // Γ^{⊗L} t^s = t Γ^{⊗L}
            Ok(compare_sparse(&g.matmul(&ts), &t.matmul(&g)))
        }),
        CheckReport::run(name, "ssep.scalar_product", pts, || {
            let ts = assemble_transfer(model, &spec.thetas, &dt_conj()?, &d_conj()?, x)?;
            let down = (1usize << spec.l) - 1;
            let lam = lambda_eigenvalue(model, x, &spec.thetas)?;
            Ok(compare_vec(&[ts.get(down, down)], &[lam]))
        })
        .with_detail(spec_detail(spec)),
    ]
}

/// Status-only helper for callers that need a plain pass/fail of a report list.
pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.status == Status::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Rates;
    use exclusion_core::rat;

    fn rates() -> Rates {
        Rates::new(int(1), int(1), rat(1, 2), rat(1, 3))
    }

    #[test]
    fn single_site_at_identity_is_identity() {
        for m in [
            Model::asep(rates(), int(2)).unwrap(),
            Model::ssep(rates()),
            Model::tasep(int(1), rat(1, 2)),
            Model::rd(rates(), int(3)).unwrap(),
        ] {
            let spec = TransferSpec::homogeneous(m.clone(), 1);
            let id: Rational = m.convention().identity_point();
            assert_eq!(build_transfer(&spec, &id).unwrap(), SparseMat::identity(2), "{}", m.name());
            assert_eq!(spec.prefactor().unwrap(), int(1));
        }
    }

    #[test]
    fn eigenvalue_is_one_at_inhomogeneities() {
        let s = Model::ssep(rates());
        let th = [rat(1, 2), rat(2, 3)];
        for t in &th {
            assert_eq!(lambda_eigenvalue(&s, t, &th).unwrap(), int(1));
        }
        let a = Model::asep(rates(), int(2)).unwrap();
        let th = [int(3), rat(2, 5)];
        for t in &th {
            assert_eq!(lambda_eigenvalue(&a, t, &th).unwrap(), int(1));
            assert_eq!(lambda_eigenvalue(&a, &t.recip(), &th).unwrap(), int(1));
        }
    }

    #[test]
    fn ssep_eigenvalue_functional_relation() {
        let s = Model::ssep(rates());
        let th = [rat(1, 2), rat(2, 3)];
        for x in [int(2), rat(-3, 7), rat(5, 4)] {
            let a = lambda_eigenvalue(&s, &x, &th).unwrap();
            let b = lambda_eigenvalue(&s, &(-&x - int(1)), &th).unwrap();
            assert_eq!(&a + &b, &a * &b);
        }
    }

    #[test]
    fn ssep_commutation_two_sites() {
        let spec = TransferSpec::homogeneous(Model::ssep(rates()), 2);
        assert!(check_commutation(&spec, &int(2), &int(3)).status.is_pass());
    }

    #[test]
    fn markov_derivative_small() {
        assert!(markov_from_transfer(&Model::ssep(rates()), 2).status.is_pass());
        assert!(markov_from_transfer(&Model::tasep(int(1), rat(1, 2)), 2).status.is_pass());
    }

    #[test]
    fn dtilde_example() {
        let s = Model::ssep(Rates::new(int(1), int(1), rat(1, 2), rat(1, 2)));
        let reports = ssep_conjugated(&TransferSpec::homogeneous(s, 1), &int(2));
        assert!(all_pass(&reports), "{reports:#?}");
    }

    #[test]
    fn pole_in_factor_is_named() {
        let spec = TransferSpec::inhomogeneous(Model::ssep(rates()), vec![int(3)]);
        // x − θ = −1 is a pole of R
        match build_transfer(&spec, &int(2)) {
            Err(Error::Pole(s)) => assert!(s.contains("R_01"), "{s}"),
            other => panic!("{other:?}"),
        }
    }
}
