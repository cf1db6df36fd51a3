//! Complex CSR sparse matrix storage and the matrix-vector kernels every
//! solver consumes.

use std::sync::OnceLock;

use num_complex::Complex;
use thiserror::Error;

use crate::dense::DenseMatrix;
use crate::scalar::{Cx, Real};

#[derive(Debug, Error, PartialEq)]
pub enum SparseError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension must be at least 1")]
    Empty,
    #[error("entry ({row}, {col}) out of bounds for dimension {n}")]
    IndexOutOfBounds { row: usize, col: usize, n: usize },
    #[error("vector length {got} does not match matrix dimension {expected}")]
    VectorLength { got: usize, expected: usize },
}

/// Square complex sparse matrix in CSR format. Columns are strictly
/// increasing within each row and duplicate entries are summed at
/// construction, so every kernel has a fixed deterministic summation order.
#[derive(Debug)]
pub struct SparseMatrix<T: Real> {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<Cx<T>>,
    one_norm_cache: OnceLock<T>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds a square n x n matrix from (row, col, value) triplets.
    /// Duplicates are summed; explicit zeros are kept.
    pub fn from_triplets(
        n: usize,
        mut triplets: Vec<(usize, usize, Cx<T>)>,
    ) -> Result<Self, SparseError> {
        if n == 0 {
            return Err(SparseError::Empty);
        }
        for &(i, j, _) in &triplets {
            if i >= n || j >= n {
                return Err(SparseError::IndexOutOfBounds { row: i, col: j, n });
            }
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; n + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Cx<T>> = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if prev == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
                prev = Some((i, j));
            }
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n,
            row_offsets,
            col_indices,
            values,
            one_norm_cache: OnceLock::new(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let one = Complex::new(T::one(), T::zero());
        Self::from_triplets(n, (0..n).map(|i| (i, i, one)).collect()).unwrap()
    }

    pub fn from_diag(diag: &[Cx<T>]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
        )
        .unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as (column, value) pairs, ascending column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Cx<T>)> + '_ {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        self.col_indices[lo..hi]
            .iter()
            .zip(self.values[lo..hi].iter())
            .map(|(&c, &v)| (c, v))
    }

    /// `A x` with a fixed per-row summation order.
    pub fn spmv(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.n, "spmv dimension mismatch");
        let mut y = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            y.push(acc);
        }
        y
    }

    /// `A^H x`, deterministic (rows ascending, columns ascending inside rows).
    pub fn spmv_adjoint(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.n, "spmv dimension mismatch");
        let mut y = crate::vecops::zeros(self.n);
        for i in 0..self.n {
            let xi = x[i];
            for (j, v) in self.row(i) {
                y[j] += v.conj() * xi;
            }
        }
        y
    }

    /// Maximum absolute column sum, cached after the first computation.
    pub fn one_norm(&self) -> T {
        *self.one_norm_cache.get_or_init(|| {
            let mut col_sums = vec![T::zero(); self.n];
            for i in 0..self.n {
                for (j, v) in self.row(i) {
                    col_sums[j] += v.norm();
                }
            }
            col_sums.into_iter().fold(T::zero(), T::max)
        })
    }

    /// Dense copy; oracle/test helper for small instances.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d.set(i, j, d.get(i, j) + v);
            }
        }
        d
    }
}

/// The forward operator `A - sigma I`; never materialized.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedOperator<'a, T: Real> {
    pub matrix: &'a SparseMatrix<T>,
    pub shift: Cx<T>,
}

impl<'a, T: Real> ShiftedOperator<'a, T> {
    pub fn new(matrix: &'a SparseMatrix<T>, shift: Cx<T>) -> Self {
        Self { matrix, shift }
    }

    /// `(A - sigma I) x`.
    pub fn apply(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut y = self.matrix.spmv(x);
        for (yi, xi) in y.iter_mut().zip(x.iter()) {
            *yi -= self.shift * xi;
        }
        y
    }
}
