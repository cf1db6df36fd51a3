//! Complex vector kernels shared by every solver component.

use crate::scalar::{Cx, Real};
use num_complex::Complex;

/// Conjugated inner product `x^H y`.
pub fn dot<T: Real>(x: &[Cx<T>], y: &[Cx<T>]) -> Cx<T> {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (a, b) in x.iter().zip(y.iter()) {
        acc += a.conj() * b;
    }
    acc
}

/// Euclidean norm.
pub fn norm2<T: Real>(x: &[Cx<T>]) -> T {
    let mut acc = T::zero();
    for a in x {
        acc += a.norm_sqr();
    }
    acc.sqrt()
}

/// `y += alpha * x`.
pub fn axpy<T: Real>(alpha: Cx<T>, x: &[Cx<T>], y: &mut [Cx<T>]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += alpha * xi;
    }
}

pub fn scale<T: Real>(alpha: Cx<T>, x: &mut [Cx<T>]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn scale_real<T: Real>(alpha: T, x: &mut [Cx<T>]) {
    for xi in x.iter_mut() {
        *xi = xi.scale(alpha);
    }
}

pub fn sub<T: Real>(x: &[Cx<T>], y: &[Cx<T>]) -> Vec<Cx<T>> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter()).map(|(a, b)| a - b).collect()
}

pub fn add<T: Real>(x: &[Cx<T>], y: &[Cx<T>]) -> Vec<Cx<T>> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter()).map(|(a, b)| a + b).collect()
}

pub fn zeros<T: Real>(n: usize) -> Vec<Cx<T>> {
    vec![Complex::new(T::zero(), T::zero()); n]
}

/// Normalizes in place, returning the original norm.
pub fn normalize<T: Real>(x: &mut [Cx<T>]) -> T {
    let n = norm2(x);
    if n > T::zero() {
        scale_real(n.recip(), x);
    }
    n
}

/// Sine of the angle between two nonzero vectors,
/// `||(I - b b^H / ||b||^2) a|| / ||a||`, clamped to [0, 1].
pub fn vector_sine<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> T {
    let an = norm2(a);
    let bn2 = b.iter().fold(T::zero(), |s, v| s + v.norm_sqr());
    debug_assert!(an > T::zero() && bn2 > T::zero());
    let coeff = dot(b, a) / Complex::new(bn2, T::zero());
    let mut w = a.to_vec();
    axpy(-coeff, b, &mut w);
    // one re-projection pass for accuracy when the angle is tiny
    let coeff2 = dot(b, &w) / Complex::new(bn2, T::zero());
    axpy(-coeff2, b, &mut w);
    (norm2(&w) / an).min(T::one())
}

/// Cosine magnitude `|b^H a| / (||a|| ||b||)`.
pub fn vector_cos<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> T {
    let an = norm2(a);
    let bn = norm2(b);
    debug_assert!(an > T::zero() && bn > T::zero());
    (dot(b, a).norm() / (an * bn)).min(T::one())
}
