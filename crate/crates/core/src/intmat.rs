//! Small integer matrices for transition blocks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension { expected: c, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> i64) -> Self {
        let mut m = IntMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Rounds every entry; returns the matrix and the largest rounding distance.
    pub fn round_from(m: &Mat) -> (Self, f64) {
        let out = IntMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].round() as i64);
        let worst = m.iter().fold(0.0_f64, |acc, v| acc.max((v - v.round()).abs()));
        (out, worst)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_f64(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j) as f64)
    }

    pub fn transpose(&self) -> Self {
        IntMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, o: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != o.rows {
            return Err(Error::Dimension { expected: self.cols, got: o.rows });
        }
        Ok(IntMatrix::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * o.get(k, j)).sum()
        }))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self.get(i, k) as f64 * v[k]).sum())
            .collect()
    }

    /// Sub-block `[r0, r0+nr) × [c0, c0+nc)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> IntMatrix {
        IntMatrix::from_fn(nr, nc, |i, j| self.get(r0 + i, c0 + j))
    }

    /// Fraction-free (Bareiss) determinant; 1 for the empty matrix.
    pub fn det(&self) -> Result<i64> {
        if self.rows != self.cols {
            return Err(Error::Dimension { expected: self.rows, got: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(1);
        }
        let mut a: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let idx = |i: usize, j: usize| i * n + j;
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[idx(k, k)] == 0 {
                let Some(p) = (k + 1..n).find(|&i| a[idx(i, k)] != 0) else {
                    return Ok(0);
                };
                for j in 0..n {
                    a.swap(idx(k, j), idx(p, j));
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[idx(i, j)] = (a[idx(i, j)] * a[idx(k, k)] - a[idx(i, k)] * a[idx(k, j)]) / prev;
                }
            }
            prev = a[idx(k, k)];
        }
        Ok((sign * a[idx(n - 1, n - 1)]) as i64)
    }

    pub fn is_unimodular(&self) -> bool {
        matches!(self.det(), Ok(1) | Ok(-1))
    }

    /// Inverse of a unimodular matrix, which is again integral.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        if !self.is_unimodular() {
            return Err(Error::Domain(format!("matrix is not unimodular (det = {:?})", self.det())));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(IntMatrix::zeros(0, 0));
        }
        let inv = self
            .to_f64()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("unimodular inverse failed".into()))?;
        let (out, _) = IntMatrix::round_from(&inv);
        if out.mul(self)? != IntMatrix::identity(n) {
            return Err(Error::Numerical("rounded inverse is not exact".into()));
        }
        Ok(out)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[i64]> = self.data.chunks(self.cols.max(1)).take(self.rows).collect();
        write!(f, "{rows:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_inverse() {
        let m = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(m.det().unwrap(), 1);
        let inv = m.inverse_unimodular().unwrap();
        assert_eq!(inv, IntMatrix::from_rows(&[vec![1, -1], vec![0, 1]]).unwrap());
        let s = IntMatrix::from_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(s.det().unwrap(), -1);
        let two = IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(two.det().unwrap(), 2);
        assert!(two.inverse_unimodular().is_err());
        assert_eq!(IntMatrix::zeros(0, 0).det().unwrap(), 1);
    }

    #[test]
    fn bareiss_matches_float_determinant() {
        let m = IntMatrix::from_rows(&[vec![2, -3, 1], vec![4, 0, -2], vec![1, 5, 3]]).unwrap();
        let f = m.to_f64().determinant();
        assert_eq!(m.det().unwrap(), f.round() as i64);
    }
}
