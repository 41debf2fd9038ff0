//! Small dense matrices, row-major.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Field, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S> Mat<S> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count does not match shape");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<T, E>(&self, f: impl Fn(&S) -> Result<T, E>) -> Result<Mat<T>, E> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(Mat { rows: self.rows, cols: self.cols, data })
    }
}

impl<S: Field> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| S::from_int(v)).collect()).collect())
    }

    pub fn from_rationals(m: &Mat<Rational>) -> Self {
        m.map(S::from_rational)
    }

    pub fn column(v: Vec<S>) -> Self {
        let n = v.len();
        Mat::from_vec(n, 1, v)
    }

    pub fn diag(v: &[S]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| if i == j { v[i].clone() } else { S::zero() })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Field::is_zero)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * rhs.cols + j;
                    let cur = std::mem::replace(&mut out.data[idx], S::zero());
                    out.data[idx] = cur + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.rows, v.len());
        (0..self.cols)
            .map(|j| (0..self.rows).fold(S::zero(), |acc, i| acc + v[i].clone() * self.get(i, j).clone()))
            .collect()
    }

    /// Kronecker product: `(A⊗B)[i·rB + k, j·cB + l] = A[i,j]·B[k,l]`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (rb, cb) = (rhs.rows, rhs.cols);
        Self::from_fn(self.rows * rb, self.cols * cb, |r, c| {
            let a = self.get(r / rb, c / cb);
            if a.is_zero() {
                S::zero()
            } else {
                a.clone() * rhs.get(r % rb, c % cb).clone()
            }
        })
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn try_inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let p = a.get(col, col).try_inv()?;
            for j in 0..n {
                let v = a.get(col, j).clone() * p.clone();
                a.set(col, j, v);
                let v = inv.get(col, j).clone() * p.clone();
                inv.set(col, j, v);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(r, j).clone() - f.clone() * a.get(col, j).clone();
                    a.set(r, j, v);
                    let v = inv.get(r, j).clone() - f.clone() * inv.get(col, j).clone();
                    inv.set(r, j, v);
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// First entry (row-major) where the two matrices differ.
    pub fn first_mismatch(&self, other: &Self) -> Option<(usize, usize)> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .position(|(a, b)| a != b)
            .map(|k| (k / self.cols, k % self.cols))
    }
}

impl<S: Field> Add for &Mat<S> {
    type Output = Mat<S>;
    fn add(self, rhs: Self) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }
}

impl<S: Field> Sub for &Mat<S> {
    type Output = Mat<S>;
    fn sub(self, rhs: Self) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }
}

impl<S: Field> Mul for &Mat<S> {
    type Output = Mat<S>;
    fn mul(self, rhs: Self) -> Mat<S> {
        self.matmul(rhs)
    }
}

impl<S: Field> Neg for &Mat<S> {
    type Output = Mat<S>;
    fn neg(self) -> Mat<S> {
        self.map(|v| -v.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    type M = Mat<Rational>;

    #[test]
    fn kron_examples() {
        assert_eq!(M::identity(2).kron(&M::identity(2)), M::identity(4));
        let d = M::diag(&[int(1), int(2)]);
        assert_eq!(d.kron(&M::identity(2)), M::diag(&[int(1), int(1), int(2), int(2)]));
        let e0 = M::from_ints(&[&[1, 0], &[0, 0]]);
        let e1 = M::from_ints(&[&[0, 0], &[0, 1]]);
        let p = e0.kron(&e1);
        let mut expect = M::zeros(4, 4);
        expect.set(1, 1, int(1));
        assert_eq!(p, expect);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = M::from_rows(vec![vec![int(0), int(2)], vec![rat(1, 3), int(5)]]);
        let inv = a.try_inverse().unwrap();
        assert_eq!(&a * &inv, M::identity(2));
        assert!(M::from_ints(&[&[1, 2], &[2, 4]]).try_inverse().is_none());
    }

    #[test]
    fn mismatch_reports_first_entry() {
        let a = M::identity(3);
        let mut b = a.clone();
        b.set(2, 1, int(4));
        assert_eq!(a.first_mismatch(&b), Some((2, 1)));
        assert_eq!(a.first_mismatch(&a), None);
    }

    #[test]
    fn row_vector_product() {
        let a = M::from_ints(&[&[1, 2], &[3, 4]]);
        assert_eq!(a.vec_mul(&[int(1), int(1)]), vec![int(4), int(6)]);
        assert_eq!(a.mul_vec(&[int(1), int(1)]), vec![int(3), int(7)]);
    }
}
