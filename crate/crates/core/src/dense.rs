//! Small dense complex linear algebra: basis storage, orthonormalization,
//! projected-matrix updates and angle computations.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{Cx, Real};
use crate::sparse::SparseMatrix;
use crate::vecops;

#[derive(Debug, Error, PartialEq)]
pub enum DenseError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("eigensolver failed to deflate within {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },
    #[error("matrix order {m} exceeds the configured maximum {max}")]
    TooLarge { m: usize, max: usize },
}

/// Orthonormalization found the candidate inside the current subspace.
/// Callers treat this as an invariant-subspace event, not a failure.
#[derive(Debug, Error, PartialEq)]
#[error("orthonormalization breakdown: candidate lies in the current subspace")]
pub struct Breakdown;

pub const BREAKDOWN_RELATIVE_THRESHOLD: f64 = 1e-14;

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T: Real> {
    rows: usize,
    cols: usize,
    values: Vec<Cx<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vecops::zeros(rows * cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Cx<T>>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            m.col_mut(j).copy_from_slice(col);
        }
        m
    }

    /// Builds from a row-major slice of (re, im) literals; test/oracle helper.
    pub fn from_rows_f64(rows: usize, cols: usize, data: &[(f64, f64)]) -> Self {
        assert_eq!(data.len(), rows * cols);
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let (re, im) = data[i * cols + j];
                m.set(i, j, Complex::new(T::real(re), T::real(im)));
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.values[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cx<T>) {
        self.values[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[Cx<T>] {
        &self.values[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Cx<T>] {
        &mut self.values[j * self.rows..(j + 1) * self.rows]
    }

    /// Appends a column; the basis-growth primitive.
    pub fn push_col(&mut self, col: &[Cx<T>]) {
        assert_eq!(col.len(), self.rows);
        self.values.extend_from_slice(col);
        self.cols += 1;
    }

    pub fn values(&self) -> &[Cx<T>] {
        &self.values
    }

    /// `A x`.
    pub fn matvec(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.cols);
        let mut y = vecops::zeros(self.rows);
        for j in 0..self.cols {
            vecops::axpy(x[j], self.col(j), &mut y);
        }
        y
    }

    /// `A^H x`.
    pub fn adjoint_vec(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| vecops::dot(self.col(j), x)).collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let y = self.matvec(rhs.col(j));
            out.col_mut(j).copy_from_slice(&y);
        }
        out
    }

    /// `A^H B`.
    pub fn adjoint_mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows);
        let mut out = Self::zeros(self.cols, rhs.cols);
        for j in 0..rhs.cols {
            for i in 0..self.cols {
                out.set(i, j, vecops::dot(self.col(i), rhs.col(j)));
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let values = self
            .values
            .iter()
            .zip(rhs.values.iter())
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            values,
        }
    }

    /// Subtracts `alpha` from the diagonal in place.
    pub fn shift_diag(&mut self, alpha: Cx<T>) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            let v = self.get(i, i);
            self.set(i, i, v - alpha);
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |s, v| s + v.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |s, v| s.max(v.norm()))
    }

    /// Keeps the leading `cols` columns.
    pub fn truncated(&self, cols: usize) -> Self {
        assert!(cols <= self.cols);
        Self {
            rows: self.rows,
            cols,
            values: self.values[..cols * self.rows].to_vec(),
        }
    }
}

/// Result of orthonormalizing a vector against a basis, keeping the
/// projection coefficients (the Hessenberg column in Arnoldi-style use).
/// `vector` is `None` on breakdown; the coefficients stay valid, since the
/// candidate then lies inside the span.
pub struct OrthoExpansion<T: Real> {
    pub vector: Option<Vec<Cx<T>>>,
    pub coefficients: Vec<Cx<T>>,
    pub norm_after: T,
}

/// Modified Gram-Schmidt with one unconditional reorthogonalization pass.
/// Returns the projection coefficients accumulated over both passes and the
/// norm of the projected vector before normalization.
pub fn orthonormalize_with_coeffs<T: Real>(
    v_basis: &DenseMatrix<T>,
    u: &[Cx<T>],
) -> OrthoExpansion<T> {
    assert_eq!(u.len(), v_basis.rows());
    let m = v_basis.cols();
    let u_norm = vecops::norm2(u);
    let mut w = u.to_vec();
    let mut coefficients = vecops::zeros(m);
    for _pass in 0..2 {
        for j in 0..m {
            let c = vecops::dot(v_basis.col(j), &w);
            vecops::axpy(-c, v_basis.col(j), &mut w);
            coefficients[j] += c;
        }
    }
    let norm_after = vecops::norm2(&w);
    if norm_after <= T::real(BREAKDOWN_RELATIVE_THRESHOLD) * u_norm {
        return OrthoExpansion {
            vector: None,
            coefficients,
            norm_after,
        };
    }
    vecops::scale_real(norm_after.recip(), &mut w);
    OrthoExpansion {
        vector: Some(w),
        coefficients,
        norm_after,
    }
}

/// Orthonormalizes `u` against the columns of `v_basis`.
/// Returns the unit vector and `||(I - V V^H) u||` before normalization.
pub fn orthonormalize_against<T: Real>(
    v_basis: &DenseMatrix<T>,
    u: &[Cx<T>],
) -> Result<(Vec<Cx<T>>, T), Breakdown> {
    let e = orthonormalize_with_coeffs(v_basis, u);
    match e.vector {
        Some(v) => Ok((v, e.norm_after)),
        None => Err(Breakdown),
    }
}

/// Projects `x` onto the orthogonal complement of the column span of `v`
/// (two passes), returning `(I - V V^H) x`.
pub fn project_out<T: Real>(v_basis: &DenseMatrix<T>, x: &[Cx<T>]) -> Vec<Cx<T>> {
    let mut w = x.to_vec();
    for _pass in 0..2 {
        for j in 0..v_basis.cols() {
            let c = vecops::dot(v_basis.col(j), &w);
            vecops::axpy(-c, v_basis.col(j), &mut w);
        }
    }
    w
}

/// `sin(angle(span(V), y)) = ||(I - P_V) y|| / ||y||`, clamped to [0, 1].
pub fn subspace_sine<T: Real>(v_basis: &DenseMatrix<T>, y: &[Cx<T>]) -> Result<T, DenseError> {
    let y_norm = vecops::norm2(y);
    if y_norm <= T::zero() {
        return Err(DenseError::ZeroVector);
    }
    let w = project_out(v_basis, y);
    Ok((vecops::norm2(&w) / y_norm).min(T::one()))
}

/// Bordered Rayleigh-quotient update: given `h = V^H A V` and a new unit
/// basis vector, returns `[V v]^H A [V v]`. Uses one product with `A` and
/// one with `A^H`.
pub fn rayleigh_update<T: Real>(
    h: &DenseMatrix<T>,
    v_basis: &DenseMatrix<T>,
    a: &SparseMatrix<T>,
    v_new: &[Cx<T>],
) -> DenseMatrix<T> {
    let m = v_basis.cols();
    assert_eq!(h.rows(), m);
    assert_eq!(h.cols(), m);
    assert_eq!(v_new.len(), a.n());
    assert_eq!(v_basis.rows(), a.n());

    let av = a.spmv(v_new);
    let ah_v = a.spmv_adjoint(v_new);

    let mut out = DenseMatrix::zeros(m + 1, m + 1);
    for j in 0..m {
        for i in 0..m {
            out.set(i, j, h.get(i, j));
        }
    }
    for i in 0..m {
        // last column: V^H (A v)
        out.set(i, m, vecops::dot(v_basis.col(i), &av));
        // last row: v^H A v_i = (A^H v)^H v_i
        out.set(m, i, vecops::dot(&ah_v, v_basis.col(i)));
    }
    out.set(m, m, vecops::dot(v_new, &av));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    type C = Cx<f64>;

    fn randn_vec(n: usize, rng: &mut impl rand::Rng) -> Vec<C> {
        (0..n)
            .map(|_| {
                Complex::new(
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                )
            })
            .collect()
    }

    fn unit(v: &mut [C]) {
        vecops::normalize(v);
    }

    fn e(n: usize, k: usize) -> Vec<C> {
        let mut v = vecops::zeros(n);
        v[k] = Complex::new(1.0, 0.0);
        v
    }

    #[test]
    fn orthonormalize_basic() {
        let v = DenseMatrix::from_columns(3, &[e(3, 0)]);
        let (v_new, norm_after) = orthonormalize_against(&v, &e(3, 1)).unwrap();
        assert!((norm_after - 1.0).abs() < 1e-15);
        assert!(vecops::norm2(&vecops::sub(&v_new, &e(3, 1))) < 1e-15);
    }

    #[test]
    fn orthonormalize_breakdown_in_span() {
        let v = DenseMatrix::from_columns(3, &[e(3, 0), e(3, 2)]);
        let mut u = e(3, 0);
        vecops::axpy(cx(2.5, -1.0), &e(3, 2), &mut u);
        assert_eq!(orthonormalize_against(&v, &u), Err(Breakdown));
    }

    #[test]
    fn orthonormalize_random_matches_projector_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (n, m) = (100, 10);
        let mut basis = DenseMatrix::zeros(n, 0);
        for _ in 0..m {
            let u = randn_vec(n, &mut rng);
            let (v, _) = orthonormalize_against(&basis, &u).unwrap();
            basis.push_col(&v);
        }
        let u = randn_vec(n, &mut rng);
        let (v_new, _) = orthonormalize_against(&basis, &u).unwrap();
        // residual orthogonality
        let vh_v: Vec<C> = (0..m).map(|j| vecops::dot(basis.col(j), &v_new)).collect();
        assert!(vecops::norm2(&vh_v) <= 1e-12);
        // parallel to the explicit projector result
        let mut oracle = u.clone();
        for j in 0..m {
            let c = vecops::dot(basis.col(j), &u);
            vecops::axpy(-c, basis.col(j), &mut oracle);
        }
        unit(&mut oracle);
        assert!(vecops::vector_sine(&v_new, &oracle) < 1e-10);
    }

    #[test]
    fn orthonormality_drift_stays_small() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (n, m) = (60, 20);
        let mut basis = DenseMatrix::zeros(n, 0);
        for _ in 0..m {
            let u = randn_vec(n, &mut rng);
            let (v, _) = orthonormalize_against(&basis, &u).unwrap();
            basis.push_col(&v);
        }
        let gram = basis.adjoint_mul(&basis);
        let mut drift = DenseMatrix::identity(m);
        drift = gram.sub(&drift);
        assert!(drift.frobenius_norm() <= 1e-10 * m as f64);
    }

    #[test]
    fn subspace_sine_geometry() {
        let v = DenseMatrix::from_columns(2, &[e(2, 0)]);
        assert!(subspace_sine(&v, &e(2, 0)).unwrap() < 1e-15);
        assert!((subspace_sine(&v, &e(2, 1)).unwrap() - 1.0).abs() < 1e-15);
        let diag = vec![cx::<f64>(1.0, 0.0), cx(1.0, 0.0)];
        let s = subspace_sine(&v, &diag).unwrap();
        assert!((s - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(subspace_sine(&v, &vecops::zeros(2)), Err(DenseError::ZeroVector));
    }

    #[test]
    fn rayleigh_update_from_empty_basis() {
        let a = crate::sparse::SparseMatrix::from_diag(&[cx::<f64>(2.0, 1.0), cx(3.0, 0.0)]);
        let basis = DenseMatrix::zeros(2, 0);
        let h0 = DenseMatrix::zeros(0, 0);
        let v = vec![cx(1.0, 0.0), cx(0.0, 0.0)];
        let h1 = rayleigh_update(&h0, &basis, &a, &v);
        assert_eq!(h1.rows(), 1);
        assert_eq!(h1.get(0, 0), cx(2.0, 1.0));
    }

    #[test]
    fn rayleigh_update_identity_gives_identity() {
        let n = 6;
        let a = crate::sparse::SparseMatrix::<f64>::identity(n);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut basis = DenseMatrix::zeros(n, 0);
        let mut h = DenseMatrix::zeros(0, 0);
        for m in 0..4 {
            let u = randn_vec(n, &mut rng);
            let (v, _) = orthonormalize_against(&basis, &u).unwrap();
            h = rayleigh_update(&h, &basis, &a, &v);
            basis.push_col(&v);
            let eye = DenseMatrix::identity(m + 1);
            assert!(h.sub(&eye).frobenius_norm() <= 1e-12);
        }
    }

    #[test]
    fn rayleigh_update_matches_dense_oracle() {
        let n = 80;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let mut trips = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || rand::Rng::gen::<f64>(&mut rng) < 0.1 {
                    trips.push((
                        i,
                        j,
                        Complex::new(
                            StandardNormal.sample(&mut rng),
                            StandardNormal.sample(&mut rng),
                        ),
                    ));
                }
            }
        }
        let a = crate::sparse::SparseMatrix::from_triplets(n, trips).unwrap();
        let a_dense = a.to_dense();
        let mut basis = DenseMatrix::zeros(n, 0);
        let mut h = DenseMatrix::zeros(0, 0);
        for _ in 0..6 {
            let u = randn_vec(n, &mut rng);
            let (v, _) = orthonormalize_against(&basis, &u).unwrap();
            h = rayleigh_update(&h, &basis, &a, &v);
            basis.push_col(&v);
            let oracle = basis.adjoint_mul(&a_dense.matmul(&basis));
            let err = h.sub(&oracle).frobenius_norm() / oracle.frobenius_norm();
            assert!(err <= 1e-12, "relative error {err}");
        }
    }

    #[test]
    fn subspace_sine_nonincreasing_as_basis_grows() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 40;
        let x = randn_vec(n, &mut rng);
        let mut basis = DenseMatrix::zeros(n, 0);
        let mut last = 1.0f64;
        for _ in 0..12 {
            let u = randn_vec(n, &mut rng);
            let (v, _) = orthonormalize_against(&basis, &u).unwrap();
            basis.push_col(&v);
            let s = subspace_sine(&basis, &x).unwrap();
            assert!(s <= last + 1e-14);
            last = s;
        }
    }
}
