//! Row-compressed sparse matrices.
//!
//! Only two products are ever needed by the iterative solvers: `A x` and
//! `Aᵀ x`. Both are exposed through [`LinearMap`] so that the iteration code
//! can be driven by an instrumented operator in tests.

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// A linear operator that can be applied and transpose-applied.
pub trait LinearMap<T: Scalar> {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `y = A x`; `x.len() == ncols`, `y.len() == nrows`.
    fn apply_into(&self, x: &[T], y: &mut [T]);

    /// `y = Aᵀ x`; `x.len() == nrows`, `y.len() == ncols`.
    fn apply_transpose_into(&self, x: &[T], y: &mut [T]);
}

/// Sparse matrix in compressed sparse row form.
///
/// Column indices are strictly increasing within each row and the final
/// row offset equals the number of stored values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn try_new(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if row_ptr.len() != rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row offsets have length {}, expected {}",
                row_ptr.len(),
                rows + 1
            )));
        }
        if row_ptr[0] != 0 || *row_ptr.last().unwrap() != values.len() {
            return Err(Error::InvalidMatrix(
                "row offsets must start at 0 and end at the number of stored values".into(),
            ));
        }
        if col_idx.len() != values.len() {
            return Err(Error::InvalidMatrix(
                "column index and value arrays differ in length".into(),
            ));
        }
        for r in 0..rows {
            let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
            if lo > hi {
                return Err(Error::InvalidMatrix(format!("row offsets decrease at row {r}")));
            }
            let row = &col_idx[lo..hi];
            if row.iter().any(|&c| c >= cols) {
                return Err(Error::InvalidMatrix(format!(
                    "column index out of range in row {r}"
                )));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMatrix(format!(
                    "column indices not strictly increasing in row {r}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite stored value".into()));
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed;
    /// explicit zeros are dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, T)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::InvalidMatrix(format!(
                    "triplet ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            sorted.push((r, c, v));
        }
        sorted.sort_by_key(|a| (a.0, a.1));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<T> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        let mut entry_row = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                entry_row.push(r);
                last = Some((r, c));
            }
        }
        // Drop exact zeros (including cancelled duplicates).
        let mut keep_col = Vec::with_capacity(col_idx.len());
        let mut keep_val = Vec::with_capacity(values.len());
        for ((c, v), r) in col_idx.into_iter().zip(values).zip(entry_row) {
            if v != T::zero() {
                keep_col.push(c);
                keep_val.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self::try_new(rows, cols, row_ptr, keep_col, keep_val)
    }

    /// Builds a matrix from a dense row-major slice, storing the nonzeros.
    pub fn from_dense(rows: usize, cols: usize, dense: &[T]) -> Result<Self> {
        check_len("dense matrix data", rows * cols, dense.len())?;
        let triplets: Vec<_> = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| (r, c, dense[r * cols + c]))
            .filter(|t| t.2 != T::zero())
            .collect();
        Self::from_triplets(rows, cols, &triplets)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n])
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let triplets: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(n, n, &triplets).expect("diagonal triplets are valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Stored entries of row `r` as `(column, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        (0..self.rows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect()
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows * self.cols];
        for (r, c, v) in self.triplets() {
            out[r * self.cols + c] = v;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, &triplets).expect("transpose of a valid matrix")
    }

    /// True when the matrix is square and equal to its transpose up to
    /// `rel_tol` times the largest stored magnitude.
    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self
            .values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()));
        let mut diff = self.triplets();
        diff.extend(self.triplets().into_iter().map(|(r, c, v)| (c, r, -v)));
        let diff = Self::from_triplets(self.rows, self.cols, &diff).expect("valid triplets");
        diff.values.iter().all(|v| v.abs() <= rel_tol * scale)
    }

    /// Euclidean norm of every row.
    pub fn row_norms(&self) -> Vec<T> {
        (0..self.rows)
            .map(|r| self.row(r).fold(T::zero(), |s, (_, v)| s + v * v).sqrt())
            .collect()
    }

    /// Returns `diag(s) * A`.
    pub fn scale_rows(&self, s: &[T]) -> Result<Self> {
        check_len("row scaling", self.rows, s.len())?;
        let mut out = self.clone();
        for r in 0..self.rows {
            for k in out.row_ptr[r]..out.row_ptr[r + 1] {
                out.values[k] *= s[r];
            }
        }
        Ok(out)
    }

    /// `A x`
    pub fn spmv(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("spmv input", self.cols, x.len())?;
        let mut y = vec![T::zero(); self.rows];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// `Aᵀ x`
    pub fn spmv_t(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("transposed spmv input", self.rows, x.len())?;
        let mut y = vec![T::zero(); self.cols];
        self.apply_transpose_into(x, &mut y);
        Ok(y)
    }
}

impl<T: Scalar> LinearMap<T> for SparseMatrix<T> {
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = T::zero();
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    fn apply_transpose_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        y.iter_mut().for_each(|v| *v = T::zero());
        for (r, &xr) in x.iter().enumerate() {
            if xr == T::zero() {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k]] += self.values[k] * xr;
            }
        }
    }
}

impl<T: Scalar, M: LinearMap<T> + ?Sized> LinearMap<T> for &M {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply_into(&self, x: &[T], y: &mut [T]) {
        (**self).apply_into(x, y)
    }
    fn apply_transpose_into(&self, x: &[T], y: &mut [T]) {
        (**self).apply_transpose_into(x, y)
    }
}
