//! Row-compressed sparse matrices with a canonical layout: each row keeps its
//! entries sorted by column, with no duplicates and no stored zeros, so two
//! matrices are equal exactly when their storage is equal.

use crate::matrix::Mat;
use crate::scalar::Field;
use crate::CoreError;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat<S> {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, S)>>,
}

impl<S: Field> SparseMat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMat { rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMat { rows: n, cols: n, data: (0..n).map(|i| vec![(i, S::one())]).collect() }
    }

    /// Builds from coordinate triplets; duplicate coordinates are summed and zeros dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, S)>,
    ) -> Result<Self, CoreError> {
        let mut data: Vec<Vec<(usize, S)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(CoreError::IndexOutOfRange { row: r, col: c, rows, cols });
            }
            data[r].push((c, v));
        }
        for row in &mut data {
            *row = canonical_row(std::mem::take(row));
        }
        Ok(SparseMat { rows, cols, data })
    }

    pub fn from_dense(m: &Mat<S>) -> Self {
        let data = (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| (j, v.clone()))
                    .collect()
            })
            .collect();
        SparseMat { rows: m.rows(), cols: m.cols(), data }
    }

    pub fn to_dense(&self) -> Mat<S> {
        let mut m = Mat::zeros(self.rows, self.cols);
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                m.set(i, *j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, S)] {
        &self.data[i]
    }

    /// Entries in (row, col) order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &S)> + '_ {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, v)| (i, *j, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        match self.data[r].binary_search_by_key(&c, |(j, _)| *j) {
            Ok(k) => self.data[r][k].1.clone(),
            Err(_) => S::zero(),
        }
    }

    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> SparseMat<T> {
        let data = self
            .data
            .iter()
            .map(|row| row.iter().map(|(j, v)| (*j, f(v))).filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        SparseMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn transpose(&self) -> Self {
        let mut data: Vec<Vec<(usize, S)>> = vec![Vec::new(); self.cols];
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                data[*j].push((i, v.clone()));
            }
        }
        SparseMat { rows: self.cols, cols: self.rows, data }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.combine(rhs, |a, b| a + b, |b| b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.combine(rhs, |a, b| a - b, |b| -b)
    }

    fn combine(&self, rhs: &Self, both: impl Fn(S, S) -> S, only_rhs: impl Fn(S) -> S) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| {
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut k) = (0, 0);
                while i < a.len() || k < b.len() {
                    let next = match (a.get(i), b.get(k)) {
                        (Some((ja, va)), Some((jb, vb))) if ja == jb => {
                            i += 1;
                            k += 1;
                            (*ja, both(va.clone(), vb.clone()))
                        }
                        (Some((ja, va)), Some((jb, _))) if ja < jb => {
                            i += 1;
                            (*ja, va.clone())
                        }
                        (Some((ja, va)), None) => {
                            i += 1;
                            (*ja, va.clone())
                        }
                        (_, Some((jb, vb))) => {
                            k += 1;
                            (*jb, only_rhs(vb.clone()))
                        }
                        (None, None) => unreachable!(),
                    };
                    if !next.1.is_zero() {
                        out.push(next);
                    }
                }
                out
            })
            .collect();
        SparseMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut acc: Vec<Option<S>> = vec![None; rhs.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            for (k, a) in row {
                for (j, b) in &rhs.data[*k] {
                    let p = a.clone() * b.clone();
                    match acc[*j].take() {
                        Some(v) => acc[*j] = Some(v + p),
                        None => {
                            acc[*j] = Some(p);
                            touched.push(*j);
                        }
                    }
                }
            }
            touched.sort_unstable();
            let out: Vec<(usize, S)> = touched
                .drain(..)
                .filter_map(|j| acc[j].take().filter(|v| !v.is_zero()).map(|v| (j, v)))
                .collect();
            data.push(out);
        }
        SparseMat { rows: self.rows, cols: rhs.cols, data }
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        self.data
            .iter()
            .map(|row| row.iter().fold(S::zero(), |acc, (j, a)| acc + a.clone() * v[*j].clone()))
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![S::zero(); self.cols];
        for (i, row) in self.data.iter().enumerate() {
            if v[i].is_zero() {
                continue;
            }
            for (j, a) in row {
                let cur = std::mem::replace(&mut out[*j], S::zero());
                out[*j] = cur + v[i].clone() * a.clone();
            }
        }
        out
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let mut data = Vec::with_capacity(self.rows * rhs.rows);
        for ra in &self.data {
            for rb in &rhs.data {
                let mut row = Vec::with_capacity(ra.len() * rb.len());
                for (ja, a) in ra {
                    for (jb, b) in rb {
                        row.push((ja * rhs.cols + jb, a.clone() * b.clone()));
                    }
                }
                row.retain(|(_, v)| !v.is_zero());
                data.push(row);
            }
        }
        SparseMat { rows: self.rows * rhs.rows, cols: self.cols * rhs.cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    /// First (row, col) in row-major order where the matrices differ, with both values.
    pub fn first_mismatch(&self, other: &Self) -> Option<(usize, usize, S, S)> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        for i in 0..self.rows {
            if self.data[i] == other.data[i] {
                continue;
            }
            let d = SparseMat { rows: 1, cols: self.cols, data: vec![self.data[i].clone()] }
                .sub(&SparseMat { rows: 1, cols: self.cols, data: vec![other.data[i].clone()] });
            if let Some((j, _)) = d.data[0].first() {
                return Some((i, *j, self.get(i, *j), other.get(i, *j)));
            }
        }
        None
    }
}

fn canonical_row<S: Field>(mut row: Vec<(usize, S)>) -> Vec<(usize, S)> {
    row.sort_by_key(|(j, _)| *j);
    let mut out: Vec<(usize, S)> = Vec::with_capacity(row.len());
    for (j, v) in row {
        match out.last_mut() {
            Some((lj, lv)) if *lj == j => *lv = lv.clone() + v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}
