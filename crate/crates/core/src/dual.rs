//! Forward-mode dual numbers: `value + deriv·ε` with `ε² = 0`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::matrix::Mat;
use crate::scalar::{Field, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S = Rational> {
    pub value: S,
    pub deriv: S,
}

impl<S: Field> Dual<S> {
    pub fn new(value: S, deriv: S) -> Self {
        Dual { value, deriv }
    }

    pub fn constant(value: S) -> Self {
        Dual { value, deriv: S::zero() }
    }

    /// The independent variable at `value`, i.e. `(value, 1)`.
    pub fn variable(value: S) -> Self {
        Dual { value, deriv: S::one() }
    }
}

impl<S: Field> Add for Dual<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual { value: self.value + rhs.value, deriv: self.deriv + rhs.deriv }
    }
}

impl<S: Field> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual { value: self.value - rhs.value, deriv: self.deriv - rhs.deriv }
    }
}

impl<S: Field> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let deriv = self.deriv * rhs.value.clone() + self.value.clone() * rhs.deriv;
        Dual { value: self.value * rhs.value, deriv }
    }
}

impl<S: Field> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { value: -self.value, deriv: -self.deriv }
    }
}

impl<S: Field> fmt::Display for Dual<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}ε)", self.value, self.deriv)
    }
}

impl<S: Field> Field for Dual<S> {
    fn zero() -> Self {
        Dual::constant(S::zero())
    }
    fn one() -> Self {
        Dual::constant(S::one())
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero() && self.deriv.is_zero()
    }
    fn from_rational(q: &Rational) -> Self {
        Dual::constant(S::from_rational(q))
    }
    /// Fails exactly when the value part vanishes.
    fn try_inv(&self) -> Option<Self> {
        let inv = self.value.try_inv()?;
        let deriv = -(self.deriv.clone() * inv.clone() * inv.clone());
        Some(Dual { value: inv, deriv })
    }
}

/// Exact entrywise derivative of a matrix-valued function at `x0`, obtained
/// by evaluating it once at the dual point `(x0, 1)`.
pub fn derivative_at<F, E>(f: F, x0: &Rational) -> Result<Mat<Rational>, E>
where
    F: FnOnce(&Dual<Rational>) -> Result<Mat<Dual<Rational>>, E>,
{
    let m = f(&Dual::variable(x0.clone()))?;
    Ok(m.map(|d| d.deriv.clone()))
}

/// Value and derivative of a matrix-valued function at `x0`.
pub fn value_and_derivative_at<F, E>(f: F, x0: &Rational) -> Result<(Mat<Rational>, Mat<Rational>), E>
where
    F: FnOnce(&Dual<Rational>) -> Result<Mat<Dual<Rational>>, E>,
{
    let m = f(&Dual::variable(x0.clone()))?;
    Ok((m.map(|d| d.value.clone()), m.map(|d| d.deriv.clone())))
}
