//! Threshold incomplete LU factorization of `A - sigma I` and the projected
//! preconditioner application used by the Jacobi-Davidson correction
//! equation.

use std::collections::BTreeSet;

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{Cx, Real};
use crate::sparse::SparseMatrix;
use crate::vecops;

#[derive(Debug, Error, PartialEq)]
pub enum IlutError {
    #[error("exact zero pivot in row {row}; retry with a smaller droptol")]
    ZeroPivot { row: usize },
    #[error("droptol must be nonnegative")]
    NegativeDroptol,
}

#[derive(Debug, Error, PartialEq)]
pub enum PrecondError {
    #[error("projected preconditioner is numerically singular (y^H M^-1 y ~ 0)")]
    NearSingularProjection,
    #[error("vector length {got} does not match preconditioner dimension {expected}")]
    Dimension { got: usize, expected: usize },
}

/// Row-compressed triangular factor.
#[derive(Debug, Clone)]
struct CsrRows<T: Real> {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Cx<T>>,
}

impl<T: Real> CsrRows<T> {
    fn from_rows(rows: Vec<Vec<(usize, Cx<T>)>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0usize);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        Self { offsets, cols, vals }
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, Cx<T>)> + '_ {
        let lo = self.offsets[i];
        let hi = self.offsets[i + 1];
        self.cols[lo..hi]
            .iter()
            .zip(self.vals[lo..hi].iter())
            .map(|(&c, &v)| (c, v))
    }

    fn nnz(&self) -> usize {
        self.cols.len()
    }
}

/// Incomplete LU factors of `A - sigma I`: unit lower triangular `L`
/// (strict part stored) and upper triangular `U` with its diagonal first
/// in each row.
#[derive(Debug, Clone)]
pub struct IlutFactors<T: Real> {
    n: usize,
    l: CsrRows<T>,
    u: CsrRows<T>,
    pub droptol: T,
    pub shift: Cx<T>,
}

/// Row-wise threshold ILUT without pivoting and without a fill cap.
/// An entry is dropped when its magnitude falls below
/// `droptol * ||row of A - sigma I||_2`; diagonal entries of `U` are always
/// kept. An exact zero pivot is a fatal configuration error.
pub fn ilut_factor<T: Real>(
    a: &SparseMatrix<T>,
    shift: Cx<T>,
    droptol: T,
) -> Result<IlutFactors<T>, IlutError> {
    if droptol < T::zero() {
        return Err(IlutError::NegativeDroptol);
    }
    let n = a.n();
    let zero = Complex::new(T::zero(), T::zero());

    let mut u_rows: Vec<Vec<(usize, Cx<T>)>> = Vec::with_capacity(n);
    let mut l_rows: Vec<Vec<(usize, Cx<T>)>> = Vec::with_capacity(n);

    // dense scatter workspace
    let mut w: Vec<Cx<T>> = vec![zero; n];
    let mut occupied: Vec<bool> = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();

    for i in 0..n {
        // gather row i of A - sigma I
        for (j, v) in a.row(i) {
            if !occupied[j] {
                occupied[j] = true;
                touched.push(j);
            }
            w[j] += v;
        }
        if !occupied[i] {
            occupied[i] = true;
            touched.push(i);
        }
        w[i] -= shift;

        let row_norm = touched
            .iter()
            .fold(T::zero(), |s, &j| s + w[j].norm_sqr())
            .sqrt();
        let thr = droptol * row_norm;

        let mut pending: BTreeSet<usize> =
            touched.iter().copied().filter(|&j| j < i).collect();

        while let Some(&k) = pending.iter().next() {
            pending.remove(&k);
            if w[k] == zero {
                continue;
            }
            let mut u_iter = u_rows[k].iter();
            let (_, diag) = u_iter.next().expect("U row stores its diagonal first");
            let mult = w[k] / diag;
            if mult.norm() < thr {
                w[k] = zero;
                continue;
            }
            w[k] = mult;
            for &(j, uv) in u_iter {
                if !occupied[j] {
                    occupied[j] = true;
                    touched.push(j);
                    if j < i {
                        pending.insert(j);
                    }
                }
                w[j] -= mult * uv;
            }
        }

        if w[i] == zero {
            return Err(IlutError::ZeroPivot { row: i });
        }

        touched.sort_unstable();
        let mut l_row = Vec::new();
        let mut u_row = vec![(i, w[i])];
        for &j in &touched {
            let v = w[j];
            if v != zero {
                if j < i {
                    l_row.push((j, v));
                } else if j > i && v.norm() >= thr {
                    u_row.push((j, v));
                }
            }
            w[j] = zero;
            occupied[j] = false;
        }
        touched.clear();
        l_rows.push(l_row);
        u_rows.push(u_row);
    }

    Ok(IlutFactors {
        n,
        l: CsrRows::from_rows(l_rows),
        u: CsrRows::from_rows(u_rows),
        droptol,
        shift,
    })
}

impl<T: Real> IlutFactors<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries in L plus U (the unit diagonal of L is implicit).
    pub fn fill(&self) -> usize {
        self.l.nnz() + self.u.nnz()
    }

    /// `M^-1 w = U^-1 (L^-1 w)`: forward substitution then back substitution.
    pub fn solve(&self, w: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(w.len(), self.n, "preconditioner dimension mismatch");
        let mut x = w.to_vec();
        for i in 0..self.n {
            let mut acc = x[i];
            for (j, lv) in self.l.row(i) {
                acc -= lv * x[j];
            }
            x[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut iter = self.u.row(i);
            let (_, diag) = iter.next().expect("U row stores its diagonal first");
            let mut acc = x[i];
            for (j, uv) in iter {
                acc -= uv * x[j];
            }
            x[i] = acc / diag;
        }
        x
    }

    /// Dense `L U` product; test oracle for the complete-LU limit.
    pub fn lu_dense(&self) -> crate::dense::DenseMatrix<T> {
        let n = self.n;
        let mut l = crate::dense::DenseMatrix::identity(n);
        for i in 0..n {
            for (j, v) in self.l.row(i) {
                l.set(i, j, v);
            }
        }
        let mut u = crate::dense::DenseMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.u.row(i) {
                u.set(i, j, v);
            }
        }
        l.matmul(&u)
    }
}

const PROJECTION_SINGULAR_THRESHOLD: f64 = 1e-14;

/// Preconditioner `(I - y y^H) M (I - y y^H)` restricted to the orthogonal
/// complement of the current Ritz vector, applied through the cached
/// `M^-1 y` and `y^H M^-1 y`.
#[derive(Debug)]
pub struct ProjectedPreconditioner<'a, T: Real> {
    base: &'a IlutFactors<T>,
    y: Vec<Cx<T>>,
    m_inv_y: Vec<Cx<T>>,
    y_m_inv_y: Cx<T>,
}

impl<'a, T: Real> ProjectedPreconditioner<'a, T> {
    /// Caches `M^-1 y` and `y^H M^-1 y` once per outer iteration.
    /// A vanishing `y^H M^-1 y` signals that the shift is numerically an
    /// eigenvalue; the caller decides how to perturb.
    pub fn new(base: &'a IlutFactors<T>, y: &[Cx<T>]) -> Result<Self, PrecondError> {
        if y.len() != base.n() {
            return Err(PrecondError::Dimension {
                got: y.len(),
                expected: base.n(),
            });
        }
        let m_inv_y = base.solve(y);
        let y_m_inv_y = vecops::dot(y, &m_inv_y);
        let scale = vecops::norm2(&m_inv_y);
        if y_m_inv_y.norm() <= T::real(PROJECTION_SINGULAR_THRESHOLD) * scale {
            return Err(PrecondError::NearSingularProjection);
        }
        Ok(Self {
            base,
            y: y.to_vec(),
            m_inv_y,
            y_m_inv_y,
        })
    }

    /// `z = M^-1 w - (y^H M^-1 w / y^H M^-1 y) M^-1 y`; the result satisfies
    /// `y^H z = 0`.
    pub fn apply(&self, w: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut z = self.base.solve(w);
        let coeff = vecops::dot(&self.y, &z) / self.y_m_inv_y;
        vecops::axpy(-coeff, &self.m_inv_y, &mut z);
        z
    }
}
