//! Generators for structured sparse test matrices.

use num_complex::Complex;

use crate::scalar::{Cx, Real};
use crate::sparse::SparseMatrix;

/// Diagonal matrix with entries `1, 2, ..., n`.
pub fn diag_range<T: Real>(n: usize) -> SparseMatrix<T> {
    let diag: Vec<Cx<T>> = (1..=n)
        .map(|i| Complex::new(T::from_usize(i).unwrap(), T::zero()))
        .collect();
    SparseMatrix::from_diag(&diag)
}

/// Five-point convection-diffusion operator on a `k x k` grid (`n = k^2`):
/// diffusion stencil plus a first-order convection term of strength `beta`
/// in both directions, nonsymmetric for `beta > 0` with complex spectrum
/// once `beta > 1`.
pub fn convection_diffusion<T: Real>(k: usize, beta: f64) -> SparseMatrix<T> {
    let n = k * k;
    let four = Complex::new(T::real(4.0), T::zero());
    let east = Complex::new(T::real(-1.0 + beta / 2.0), T::zero());
    let west = Complex::new(T::real(-1.0 - beta / 2.0), T::zero());
    let north = Complex::new(T::real(-1.0 + beta / 2.0), T::zero());
    let south = Complex::new(T::real(-1.0 - beta / 2.0), T::zero());
    let mut trips = Vec::with_capacity(5 * n);
    for row in 0..k {
        for col in 0..k {
            let i = row * k + col;
            trips.push((i, i, four));
            if col + 1 < k {
                trips.push((i, i + 1, east));
            }
            if col > 0 {
                trips.push((i, i - 1, west));
            }
            if row + 1 < k {
                trips.push((i, i + k, north));
            }
            if row > 0 {
                trips.push((i, i - k, south));
            }
        }
    }
    SparseMatrix::from_triplets(n, trips).unwrap()
}

/// Convection-diffusion operator with the first diagonal entry replaced by
/// `impurity` (possibly complex), detaching one eigenvalue from the bulk of
/// the spectrum; a target placed near it is then well separated.
pub fn convection_diffusion_with_impurity<T: Real>(
    k: usize,
    beta: f64,
    impurity: Cx<T>,
) -> SparseMatrix<T> {
    let base = convection_diffusion::<T>(k, beta);
    let n = base.n();
    let mut trips: Vec<(usize, usize, Cx<T>)> = Vec::with_capacity(base.nnz());
    for i in 0..n {
        for (j, v) in base.row(i) {
            if i == 0 && j == 0 {
                trips.push((0, 0, impurity));
            } else {
                trips.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(n, trips).unwrap()
}
