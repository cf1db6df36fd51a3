//! Dense complex eigensolver for the projected matrices: Hessenberg
//! reduction followed by the implicit single-shift QR algorithm with
//! eigenvector extraction from the Schur form.

use num_complex::Complex;

use crate::dense::{DenseError, DenseMatrix};
use crate::scalar::{Cx, Real};
use crate::vecops;

/// Largest projected-matrix order accepted by [`small_eig`].
pub const MAX_SMALL_EIG_ORDER: usize = 200;

/// Eigen-decomposition of a projected matrix: values paired with unit
/// eigenvectors stored column by column.
#[derive(Debug, Clone)]
pub struct RitzSet<T: Real> {
    pub values: Vec<Cx<T>>,
    pub vectors: DenseMatrix<T>,
}

impl<T: Real> RitzSet<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reorders pairs by ascending |value - sigma|; ties break by ascending
    /// imaginary part, then real part, so runs are reproducible.
    pub fn order_toward(&mut self, sigma: Cx<T>) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        let values = &self.values;
        idx.sort_by(|&a, &b| {
            let da = (values[a] - sigma).norm();
            let db = (values[b] - sigma).norm();
            da.partial_cmp(&db)
                .unwrap()
                .then(values[a].im.partial_cmp(&values[b].im).unwrap())
                .then(values[a].re.partial_cmp(&values[b].re).unwrap())
        });
        let new_values: Vec<Cx<T>> = idx.iter().map(|&i| values[i]).collect();
        let cols: Vec<Vec<Cx<T>>> = idx.iter().map(|&i| self.vectors.col(i).to_vec()).collect();
        self.values = new_values;
        self.vectors = DenseMatrix::from_columns(self.vectors.rows(), &cols);
    }
}

/// Full eigen-decomposition of a square complex matrix of modest order.
/// Every eigenvector is normalized to unit 2-norm.
pub fn small_eig<T: Real>(h: &DenseMatrix<T>) -> Result<RitzSet<T>, DenseError> {
    if !h.is_square() {
        return Err(DenseError::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let m = h.rows();
    if m == 0 {
        return Err(DenseError::Dimension("order must be at least 1".into()));
    }
    if m > MAX_SMALL_EIG_ORDER {
        return Err(DenseError::TooLarge {
            m,
            max: MAX_SMALL_EIG_ORDER,
        });
    }
    if m == 1 {
        return Ok(RitzSet {
            values: vec![h.get(0, 0)],
            vectors: DenseMatrix::identity(1),
        });
    }

    let mut t = h.clone();
    let mut q = DenseMatrix::identity(m);
    hessenberg_in_place(&mut t, &mut q);
    schur_in_place(&mut t, &mut q)?;

    let values: Vec<Cx<T>> = (0..m).map(|i| t.get(i, i)).collect();
    let vectors = triangular_eigenvectors(&t, &q);
    Ok(RitzSet { values, vectors })
}

/// Reduces `t` to upper Hessenberg form by Householder similarity,
/// accumulating the transformation into `q` (so h = q t q^H throughout).
fn hessenberg_in_place<T: Real>(t: &mut DenseMatrix<T>, q: &mut DenseMatrix<T>) {
    let m = t.rows();
    for k in 0..m.saturating_sub(2) {
        // column k below the subdiagonal
        let len = m - k - 1;
        let mut v: Vec<Cx<T>> = (0..len).map(|i| t.get(k + 1 + i, k)).collect();
        let norm_x = vecops::norm2(&v);
        if norm_x <= T::zero() {
            continue;
        }
        let alpha = v[0];
        let phase = if alpha.norm() > T::zero() {
            alpha / Complex::new(alpha.norm(), T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        };
        let beta = -phase * Complex::new(norm_x, T::zero());
        v[0] = alpha - beta;
        let vnorm2 = v.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        if vnorm2 <= T::zero() {
            continue;
        }
        let two_over = T::two() / vnorm2;

        // left: rows k+1..m for columns k..m
        for j in k..m {
            let mut w = Complex::new(T::zero(), T::zero());
            for i in 0..len {
                w += v[i].conj() * t.get(k + 1 + i, j);
            }
            let w = w.scale(two_over);
            for i in 0..len {
                let cur = t.get(k + 1 + i, j);
                t.set(k + 1 + i, j, cur - v[i] * w);
            }
        }
        // right: columns k+1..m for all rows
        for i in 0..m {
            let mut w = Complex::new(T::zero(), T::zero());
            for j in 0..len {
                w += t.get(i, k + 1 + j) * v[j];
            }
            let w = w.scale(two_over);
            for j in 0..len {
                let cur = t.get(i, k + 1 + j);
                t.set(i, k + 1 + j, cur - w * v[j].conj());
            }
        }
        // accumulate q := q P
        for i in 0..m {
            let mut w = Complex::new(T::zero(), T::zero());
            for j in 0..len {
                w += q.get(i, k + 1 + j) * v[j];
            }
            let w = w.scale(two_over);
            for j in 0..len {
                let cur = q.get(i, k + 1 + j);
                q.set(i, k + 1 + j, cur - w * v[j].conj());
            }
        }
        // clean the annihilated entries
        t.set(k + 1, k, beta);
        for i in k + 2..m {
            t.set(i, k, Complex::new(T::zero(), T::zero()));
        }
    }
}

/// Complex Givens rotation: returns (c, s) with c real such that
/// [c s; -conj(s) c] [a; b] = [r; 0].
fn givens<T: Real>(a: Cx<T>, b: Cx<T>) -> (T, Cx<T>) {
    let bn = b.norm();
    if bn <= T::zero() {
        return (T::one(), Complex::new(T::zero(), T::zero()));
    }
    let an = a.norm();
    if an <= T::zero() {
        return (T::zero(), b.conj() / Complex::new(bn, T::zero()));
    }
    let d = (an * an + bn * bn).sqrt();
    let c = an / d;
    let phase = a / Complex::new(an, T::zero());
    let s = phase * b.conj() / Complex::new(d, T::zero());
    (c, s)
}

/// Applies the rotation to rows (i, i+1) of `t` over columns `cols`.
fn rot_left<T: Real>(
    t: &mut DenseMatrix<T>,
    i: usize,
    c: T,
    s: Cx<T>,
    cols: std::ops::Range<usize>,
) {
    for j in cols {
        let a = t.get(i, j);
        let b = t.get(i + 1, j);
        t.set(i, j, a.scale(c) + s * b);
        t.set(i + 1, j, -s.conj() * a + b.scale(c));
    }
}

/// Applies the adjoint rotation to columns (i, i+1) of `t` over rows `rows`.
fn rot_right<T: Real>(
    t: &mut DenseMatrix<T>,
    i: usize,
    c: T,
    s: Cx<T>,
    rows: std::ops::Range<usize>,
) {
    for r in rows {
        let a = t.get(r, i);
        let b = t.get(r, i + 1);
        t.set(r, i, a.scale(c) + s.conj() * b);
        t.set(r, i + 1, -s * a + b.scale(c));
    }
}

/// Eigenvalue of the trailing 2x2 block closest to its (2,2) entry.
fn wilkinson_shift<T: Real>(t: &DenseMatrix<T>, hi: usize) -> Cx<T> {
    let a = t.get(hi - 1, hi - 1);
    let b = t.get(hi - 1, hi);
    let c = t.get(hi, hi - 1);
    let d = t.get(hi, hi);
    let half = T::real(0.5);
    let p = (a - d).scale(half);
    let disc = (p * p + b * c).sqrt();
    let r1 = d + p + disc;
    let r2 = d + p - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Implicit single-shift QR iteration driving `t` to upper triangular form,
/// accumulating rotations into `q`. Fails if the full matrix does not
/// deflate within 30 * m sweeps.
fn schur_in_place<T: Real>(t: &mut DenseMatrix<T>, q: &mut DenseMatrix<T>) -> Result<(), DenseError> {
    let m = t.rows();
    let ulp = T::epsilon();
    let hnorm = t.frobenius_norm();
    let max_sweeps = 30 * m;
    let mut sweeps = 0usize;
    let mut hi = m - 1;
    let mut iters_since_deflation = 0usize;

    loop {
        // set negligible subdiagonals to exact zero
        let mut i = hi;
        while i >= 1 {
            let sub = t.get(i, i - 1).norm();
            if sub > T::zero() {
                let mut anchor = t.get(i - 1, i - 1).norm() + t.get(i, i).norm();
                if anchor <= T::zero() {
                    anchor = hnorm;
                }
                if sub <= ulp * anchor {
                    t.set(i, i - 1, Complex::new(T::zero(), T::zero()));
                }
            }
            i -= 1;
        }
        // deflate converged trailing entries
        while hi > 0 && t.get(hi, hi - 1).norm() <= T::zero() {
            hi -= 1;
            iters_since_deflation = 0;
        }
        if hi == 0 {
            return Ok(());
        }
        // active block [lo..=hi]
        let mut lo = hi;
        while lo > 0 && t.get(lo, lo - 1).norm() > T::zero() {
            lo -= 1;
        }

        sweeps += 1;
        iters_since_deflation += 1;
        if sweeps > max_sweeps {
            return Err(DenseError::EigenNoConvergence { sweeps: max_sweeps });
        }

        let mu = if iters_since_deflation % 10 == 0 {
            // exceptional shift to break symmetric stagnation
            t.get(hi, hi) + Complex::new(T::real(0.75) * t.get(hi, hi - 1).norm(), T::zero())
        } else {
            wilkinson_shift(t, hi)
        };

        // bulge-chasing sweep
        let mut x = t.get(lo, lo) - mu;
        let mut y = t.get(lo + 1, lo);
        for i in lo..hi {
            let (c, s) = givens(x, y);
            let col_start = if i == lo { lo } else { i - 1 };
            rot_left(t, i, c, s, col_start..m);
            let row_end = (i + 2).min(hi) + 1;
            rot_right(t, i, c, s, 0..row_end);
            rot_right(q, i, c, s, 0..m);
            if i + 1 < hi {
                x = t.get(i + 1, i);
                y = t.get(i + 2, i);
            }
        }
    }
}

/// Right eigenvectors of `h = q t q^H` from back-substitution on the
/// triangular `t`, lifted through `q` and normalized.
fn triangular_eigenvectors<T: Real>(t: &DenseMatrix<T>, q: &DenseMatrix<T>) -> DenseMatrix<T> {
    let m = t.rows();
    let tnorm = t.max_abs().max(T::min_positive_value());
    let smlnum = T::epsilon() * tnorm;
    let big = T::one() / (T::epsilon() * T::epsilon());
    let mut vectors = DenseMatrix::zeros(m, m);

    for k in 0..m {
        let lam = t.get(k, k);
        let mut w = vecops::zeros(k + 1);
        w[k] = Complex::new(T::one(), T::zero());
        for i in (0..k).rev() {
            let mut s = Complex::new(T::zero(), T::zero());
            for j in i + 1..=k {
                s += t.get(i, j) * w[j];
            }
            let mut d = t.get(i, i) - lam;
            if d.norm() < smlnum {
                d = Complex::new(smlnum, T::zero());
            }
            w[i] = -s / d;
            if w[i].norm() > big {
                let inv = w[i].norm().recip();
                for entry in w.iter_mut() {
                    *entry = entry.scale(inv);
                }
            }
        }
        // lift: z = Q[:, 0..=k] w
        let mut z = vecops::zeros(m);
        for (j, wj) in w.iter().enumerate() {
            vecops::axpy(*wj, q.col(j), &mut z);
        }
        vecops::normalize(&mut z);
        vectors.col_mut(k).copy_from_slice(&z);
    }
    vectors
}
