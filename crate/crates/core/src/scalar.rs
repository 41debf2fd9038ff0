//! Scalar fields used throughout the crate.
//!
//! Everything on the correctness path runs over [`Rational`]. The [`Field`]
//! trait exists so the same matrix constructors can also be evaluated over
//! dual numbers (exact derivatives), univariate rational functions, and, for
//! the few explicitly approximate computations, `f64`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::CoreError;

/// Arbitrary precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_rational(q: &Rational) -> Self;
    /// Multiplicative inverse, `None` when the element is not invertible.
    fn try_inv(&self) -> Option<Self>;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&int(n))
    }

    fn try_div(&self, rhs: &Self) -> Option<Self> {
        rhs.try_inv().map(|r| self.clone() * r)
    }

    fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Field for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn try_inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_rational(q: &Rational) -> Self {
        to_f64(q)
    }
    fn try_inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` in lowest terms. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"`, `"p/q"` or `"-p/q"`; a zero denominator is an error rather than a panic.
pub fn parse_rational(s: &str) -> Result<Rational, CoreError> {
    let t = s.trim();
    let bad = || CoreError::Parse(s.to_string());
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational with the same value as a finite `f64`.
pub fn from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// `|a - b| <= tol * max(|a|, |b|)`, evaluated exactly.
pub fn rel_close(a: &Rational, b: &Rational, tol: &Rational) -> bool {
    let diff = (a - b).abs();
    let scale = std::cmp::max(a.abs(), b.abs());
    diff <= tol * scale
}

/// Relative closeness of two floats, decided in exact arithmetic.
pub fn rel_close_f64(a: f64, b: f64, tol: &Rational) -> bool {
    match (from_f64(a), from_f64(b)) {
        (Some(a), Some(b)) => rel_close(&a, &b, tol),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational(" -4/6 ").unwrap(), rat(-2, 3));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("0.5").is_err());
    }

    #[test]
    fn pow_and_inverse() {
        assert_eq!(rat(2, 3).pow(3), rat(8, 27));
        assert_eq!(rat(2, 3).pow(0), int(1));
        assert_eq!(Field::try_inv(&int(0)), None);
        assert_eq!(Field::try_inv(&rat(-2, 5)), Some(rat(-5, 2)));
    }

    #[test]
    fn relative_closeness_is_exact() {
        let tol = rat(1, 1_000_000_000_000);
        assert!(rel_close_f64(1.0, 1.0 + 1e-13, &tol));
        assert!(!rel_close_f64(1.0, 1.0 + 1e-11, &tol));
        assert!(rel_close(&int(0), &int(0), &tol));
    }
}
