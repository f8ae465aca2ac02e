//! Dense Cholesky factorization for the splitting baseline.
//!
//! The projected-gradient solver never touches this module.

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        check_len("dense matrix data", n * n, data.len())?;
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("dense product input", self.n, x.len())?;
        Ok(self
            .data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).fold(T::zero(), |s, (&a, &b)| s + a * b))
            .collect())
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.n + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.n + c]
    }
}

/// Lower-triangular factor `L` with `M = L Lᵀ`. Immutable once built.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    /// Row-major lower triangle; entries above the diagonal are zero.
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a symmetric positive definite matrix. Only the lower triangle is read.
    pub fn factor(m: &DenseMatrix<T>) -> Result<Self> {
        let n = m.dim();
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = m[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: d.as_f64(),
                });
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        check_len("factored solve right-hand side", self.n, b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Overwrites `x` (holding `b`) with the solution of `M x = b`.
    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        // L y = b
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s = row.iter().zip(&x[..i]).fold(x[i], |s, (&a, &b)| s - a * b);
            x[i] = s / self.l[i * n + i];
        }
        // Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
    }
}
