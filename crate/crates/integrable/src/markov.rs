//! Markov generator assembly, exact stationary states, observables and
//! uniformized time evolution.

use exclusion_core::{embed_local, exact_nullspace, int, occupation, to_f64, Field, Rational, SparseMat};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::Model;

/// `M = B₁ + Σ w_{ℓ,ℓ+1} + B̄_L` on `2^L` configurations, site 1 most significant.
pub fn build_markov(model: &Model, l: usize) -> Result<SparseMat<Rational>> {
    if l == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    let ops = model.local_operators();
    let mut terms: Vec<(&_, usize)> = vec![(&ops.b, 1), (&ops.bbar, l)];
    terms.extend((1..l).map(|s| (&ops.w, s)));
    let embedded = terms
        .par_iter()
        .map(|(op, site)| embed_local(op, *site, l))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let dim = 1usize << l;
    Ok(embedded.iter().fold(SparseMat::zeros(dim, dim), |acc, t| acc.add(t)))
}

/// Stationary weights with their normalization `Z = Σ weights`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<S = Rational> {
    pub l: usize,
    pub weights: Vec<S>,
    pub z: S,
}

impl<S: Field> Distribution<S> {
    pub fn new(l: usize, weights: Vec<S>) -> Result<Self> {
        if weights.len() != 1 << l {
            return Err(Error::Internal(format!("{} weights for L = {l}", weights.len())));
        }
        let z = weights.iter().fold(S::zero(), |a, w| a + w.clone());
        if z.is_zero() {
            return Err(Error::ZeroNormalization("sum of weights".into()));
        }
        Ok(Distribution { l, weights, z })
    }

    pub fn probabilities(&self) -> Vec<S> {
        let inv = self.z.try_inv().expect("nonzero normalization");
        self.weights.iter().map(|w| w.clone() * inv.clone()).collect()
    }

    /// Occupation tuple of configuration `index`, site 1 first.
    pub fn configuration(&self, index: usize) -> Vec<u8> {
        (0..self.l).map(|s| occupation(index, s, self.l) as u8).collect()
    }
}

impl Distribution<Rational> {
    pub fn to_f64(&self) -> Distribution<f64> {
        Distribution { l: self.l, weights: self.weights.iter().map(to_f64).collect(), z: to_f64(&self.z) }
    }
}

/// Exact kernel vector of `m`, normalized to total weight one.
///
/// With `nonnegative_rates` set, a negative weight is reported as an internal error.
pub fn steady_state_exact(m: &SparseMat<Rational>, nonnegative_rates: bool) -> Result<Distribution> {
    let dim = m.rows();
    if !dim.is_power_of_two() || m.cols() != dim {
        return Err(Error::Internal(format!("generator of shape {}x{}", m.rows(), m.cols())));
    }
    let l = dim.trailing_zeros() as usize;
    let mut kernel = exact_nullspace(m);
    if kernel.len() != 1 {
        return Err(Error::KernelDimension(kernel.len()));
    }
    let v = kernel.pop().expect("one vector");
    let s: Rational = v.iter().sum();
    if Field::is_zero(&s) {
        return Err(Error::ZeroNormalization("stationary vector sums to zero".into()));
    }
    let p: Vec<Rational> = v.iter().map(|x| x / &s).collect();
    if nonnegative_rates {
        if let Some(i) = p.iter().position(|x| x < &int(0)) {
            return Err(Error::Internal(format!("negative stationary weight {} at configuration {i}", p[i])));
        }
    }
    Distribution::new(l, p)
}

/// Builds the generator and solves for its stationary state.
pub fn steady_state(model: &Model, l: usize) -> Result<Distribution> {
    let nonneg = model.params().iter().all(|(_, v)| v >= &int(0));
    steady_state_exact(&build_markov(model, l)?, nonneg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observables<S = Rational> {
    /// `⟨n_i⟩` for sites `1..=L`.
    pub density: Vec<S>,
    /// Net particle flow from site `i` to `i+1`, for `i = 1..L−1`.
    pub current_lat: Vec<S>,
    /// Net pair annihilation on bonds `(i, i+1)`; zero for the exclusion processes.
    pub current_eva: Vec<S>,
}

/// Densities and currents of a distribution, with the rates read from `w`:
/// the hop rates `10→01`, `01→10` and the pair rates `11→00`, `00→11`.
pub fn observables<S: Field>(dist: &Distribution<S>, model: &Model) -> Observables<S> {
    let w = model.local_operators().w;
    let c = |r: usize, col: usize| S::from_rational(w.get(r, col));
    let (right, left) = (c(1, 2), c(2, 1));
    let (annihilate, create) = (c(0, 3), c(3, 0));
    let l = dist.l;
    let p = dist.probabilities();
    let mut density = vec![S::zero(); l];
    let mut pairs = vec![[S::zero(), S::zero(), S::zero(), S::zero()]; l.saturating_sub(1)];
    for (idx, pc) in p.iter().enumerate() {
        for (s, d) in density.iter_mut().enumerate() {
            if occupation(idx, s, l) == 1 {
                *d = d.clone() + pc.clone();
            }
        }
        for (s, pr) in pairs.iter_mut().enumerate() {
            let k = 2 * occupation(idx, s, l) + occupation(idx, s + 1, l);
            pr[k] = pr[k].clone() + pc.clone();
        }
    }
    let current_lat = pairs.iter().map(|pr| right.clone() * pr[2].clone() - left.clone() * pr[1].clone()).collect();
    let current_eva =
        pairs.iter().map(|pr| annihilate.clone() * pr[3].clone() - create.clone() * pr[0].clone()).collect();
    Observables { density, current_lat, current_eva }
}

/// Result of a truncated uniformization series; never exact.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxDistribution {
    pub l: usize,
    pub probabilities: Vec<f64>,
    /// Poisson mass beyond the truncation order, an upper bound on the L¹ error.
    pub neglected_mass: f64,
}

/// `P_t ≈ Σ_{k≤order} e^{−Λt}(Λt)^k/k! Πᵏ P₀` with `Π = I + M/Λ`.
pub fn evolve(p0: &[f64], m: &SparseMat<Rational>, t: &Rational, order: usize) -> Result<ApproxDistribution> {
    let dim = m.rows();
    if p0.len() != dim || !dim.is_power_of_two() {
        return Err(Error::Internal(format!("initial vector of length {} for dimension {dim}", p0.len())));
    }
    if order == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    let l = dim.trailing_zeros() as usize;
    let lambda = (0..dim).map(|i| to_f64(&m.get(i, i)).abs()).fold(0.0, f64::max);
    let lt = lambda * to_f64(t);
    if lt == 0.0 {
        return Ok(ApproxDistribution { l, probabilities: p0.to_vec(), neglected_mass: 0.0 });
    }
    let mf = m.map(|v| to_f64(v) / lambda);
    let step = |v: &[f64]| -> Vec<f64> { mf.mul_vec(v).iter().zip(v).map(|(a, b)| a + b).collect() };
    let ln_lt = lt.ln();
    let mut log_w = -lt;
    let mut acc = vec![0.0; dim];
    let mut cur = p0.to_vec();
    let mut used = 0.0_f64;
    for k in 0..=order {
        if k > 0 {
            cur = step(&cur);
            log_w += ln_lt - (k as f64).ln();
        }
        let wk = log_w.exp();
        used += wk;
        for (a, c) in acc.iter_mut().zip(&cur) {
            *a += wk * c;
        }
    }
    Ok(ApproxDistribution { l, probabilities: acc, neglected_mass: (1.0 - used).max(0.0) })
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
