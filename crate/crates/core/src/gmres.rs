//! Right-preconditioned restarted GMRES for the inner linear systems, plus
//! the projected operator of the Jacobi-Davidson correction equation.

use num_complex::Complex;

use crate::ilut::{IlutFactors, ProjectedPreconditioner};
use crate::scalar::{Cx, Real};
use crate::sparse::{ShiftedOperator, SparseMatrix};
use crate::vecops;

/// Abstract operator action `v -> Op v`.
pub trait LinearOperator<T: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Cx<T>]) -> Vec<Cx<T>>;
}

impl<'a, T: Real> LinearOperator<T> for ShiftedOperator<'a, T> {
    fn dim(&self) -> usize {
        self.matrix.n()
    }

    fn apply(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        ShiftedOperator::apply(self, x)
    }
}

/// `(I - y y^H)(A - sigma I)(I - y y^H)`, the correction-equation operator
/// restricted to the orthogonal complement of the Ritz vector.
pub struct JdProjectedOperator<'a, T: Real> {
    shifted: ShiftedOperator<'a, T>,
    y: Vec<Cx<T>>,
}

impl<'a, T: Real> JdProjectedOperator<'a, T> {
    /// `y` must be a unit vector.
    pub fn new(a: &'a SparseMatrix<T>, shift: Cx<T>, y: &[Cx<T>]) -> Self {
        debug_assert!((vecops::norm2(y) - T::one()).abs() <= T::real(1e-12));
        Self {
            shifted: ShiftedOperator::new(a, shift),
            y: y.to_vec(),
        }
    }

    fn project(&self, v: &mut [Cx<T>]) {
        let c = vecops::dot(&self.y, v);
        vecops::axpy(-c, &self.y, v);
    }
}

impl<'a, T: Real> LinearOperator<T> for JdProjectedOperator<'a, T> {
    fn dim(&self) -> usize {
        self.shifted.matrix.n()
    }

    fn apply(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut inner = x.to_vec();
        self.project(&mut inner);
        let mut out = self.shifted.apply(&inner);
        self.project(&mut out);
        out
    }
}

/// Preconditioner action `w -> M^-1 w`.
pub trait Preconditioner<T: Real> {
    fn apply_inv(&self, w: &[Cx<T>]) -> Vec<Cx<T>>;
}

pub struct IdentityPreconditioner;

impl<T: Real> Preconditioner<T> for IdentityPreconditioner {
    fn apply_inv(&self, w: &[Cx<T>]) -> Vec<Cx<T>> {
        w.to_vec()
    }
}

impl<T: Real> Preconditioner<T> for IlutFactors<T> {
    fn apply_inv(&self, w: &[Cx<T>]) -> Vec<Cx<T>> {
        self.solve(w)
    }
}

impl<'a, T: Real> Preconditioner<T> for ProjectedPreconditioner<'a, T> {
    fn apply_inv(&self, w: &[Cx<T>]) -> Vec<Cx<T>> {
        self.apply(w)
    }
}

/// Outcome of one inner solve. `relres` is always recomputed from the
/// returned solution against the true residual, never taken from the
/// Krylov recurrence.
#[derive(Debug, Clone)]
pub struct InnerSolveReport<T: Real> {
    pub solution: Vec<Cx<T>>,
    pub relres: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Right-preconditioned GMRES(restart) from the zero initial guess.
/// Convergence is declared on the true relative residual; the recurrence
/// estimate only steers iteration inside a cycle. `iterations` counts every
/// operator application, including residual recomputations at restart
/// boundaries.
pub fn gmres_right<T: Real>(
    op: &dyn LinearOperator<T>,
    b: &[Cx<T>],
    m_inv: &dyn Preconditioner<T>,
    tol: T,
    restart: usize,
    maxit: usize,
) -> InnerSolveReport<T> {
    gmres_right_impl(op, b, m_inv, tol, restart, maxit, None)
}

/// GMRES variant whose Krylov basis is kept orthogonal to a unit constraint
/// vector; the correction-equation path uses it to hold every iteration
/// vector in the complement of the Ritz vector.
pub fn gmres_right_in_complement<T: Real>(
    op: &dyn LinearOperator<T>,
    b: &[Cx<T>],
    m_inv: &dyn Preconditioner<T>,
    tol: T,
    restart: usize,
    maxit: usize,
    constraint: &[Cx<T>],
) -> InnerSolveReport<T> {
    gmres_right_impl(op, b, m_inv, tol, restart, maxit, Some(constraint))
}

fn gmres_right_impl<T: Real>(
    op: &dyn LinearOperator<T>,
    b: &[Cx<T>],
    m_inv: &dyn Preconditioner<T>,
    tol: T,
    restart: usize,
    maxit: usize,
    constraint: Option<&[Cx<T>]>,
) -> InnerSolveReport<T> {
    assert!(restart >= 1, "restart must be at least 1");
    assert!(tol > T::zero() && tol <= T::one(), "tol must lie in (0, 1]");
    let n = op.dim();
    assert_eq!(b.len(), n);

    let bnorm = vecops::norm2(b);
    if bnorm <= T::zero() {
        return InnerSolveReport {
            solution: vecops::zeros(n),
            relres: T::zero(),
            iterations: 0,
            converged: true,
        };
    }

    let zero = Complex::new(T::zero(), T::zero());
    let mut x = vecops::zeros(n);
    let mut r = b.to_vec();
    let mut applies = 0usize;
    let reorth_threshold = T::real(std::f64::consts::FRAC_1_SQRT_2);

    let clamp_to_complement = |w: &mut [Cx<T>]| {
        if let Some(y) = constraint {
            let c = vecops::dot(y, w);
            vecops::axpy(-c, y, w);
        }
    };

    loop {
        let mut basis: Vec<Vec<Cx<T>>> = Vec::with_capacity(restart + 1);
        let beta = {
            let mut v0 = r.clone();
            clamp_to_complement(&mut v0);
            let n0 = vecops::norm2(&v0);
            vecops::scale_real(n0.recip(), &mut v0);
            basis.push(v0);
            n0
        };
        // Hessenberg column storage plus the Givens-rotated residual vector
        let mut h: Vec<Vec<Cx<T>>> = Vec::with_capacity(restart);
        let mut cs: Vec<T> = Vec::with_capacity(restart);
        let mut sn: Vec<Cx<T>> = Vec::with_capacity(restart);
        let mut g: Vec<Cx<T>> = vec![zero; restart + 1];
        g[0] = Complex::new(beta, T::zero());

        let mut j = 0usize;
        while j < restart && applies < maxit {
            let z = m_inv.apply_inv(&basis[j]);
            let mut w = op.apply(&z);
            applies += 1;
            let wnorm_before = vecops::norm2(&w);

            let mut hcol = vec![zero; j + 2];
            for (i, vi) in basis.iter().enumerate() {
                let c = vecops::dot(vi, &w);
                vecops::axpy(-c, vi, &mut w);
                hcol[i] = c;
            }
            // reorthogonalize when cancellation ate most of the vector
            if vecops::norm2(&w) < reorth_threshold * wnorm_before {
                for (i, vi) in basis.iter().enumerate() {
                    let c = vecops::dot(vi, &w);
                    vecops::axpy(-c, vi, &mut w);
                    hcol[i] += c;
                }
            }
            clamp_to_complement(&mut w);
            let wnorm = vecops::norm2(&w);
            hcol[j + 1] = Complex::new(wnorm, T::zero());
            let happy = wnorm <= T::epsilon() * wnorm_before.max(T::min_positive_value());

            // apply accumulated rotations to the new column
            for i in 0..j {
                let a = hcol[i];
                let bb = hcol[i + 1];
                hcol[i] = a.scale(cs[i]) + sn[i] * bb;
                hcol[i + 1] = -sn[i].conj() * a + bb.scale(cs[i]);
            }
            let (c, s) = plane_rotation(hcol[j], hcol[j + 1]);
            let a = hcol[j];
            let bb = hcol[j + 1];
            hcol[j] = a.scale(c) + s * bb;
            hcol[j + 1] = zero;
            cs.push(c);
            sn.push(s);
            let gj = g[j];
            g[j] = gj.scale(c) + s * g[j + 1];
            g[j + 1] = -s.conj() * gj + g[j + 1].scale(c);

            h.push(hcol);
            if !happy {
                let mut v = w;
                vecops::scale_real(wnorm.recip(), &mut v);
                basis.push(v);
            }
            j += 1;

            let estimate = g[j].norm();
            if happy || estimate <= tol * bnorm {
                break;
            }
        }

        if j > 0 {
            // back substitution on the rotated Hessenberg block
            let mut y = vec![zero; j];
            for i in (0..j).rev() {
                let mut acc = g[i];
                for k in i + 1..j {
                    acc -= h[k][i] * y[k];
                }
                y[i] = acc / h[i][i];
            }
            let mut u = vecops::zeros(n);
            for (k, yk) in y.iter().enumerate() {
                vecops::axpy(*yk, &basis[k], &mut u);
            }
            let correction = m_inv.apply_inv(&u);
            for (xi, ci) in x.iter_mut().zip(correction.iter()) {
                *xi += *ci;
            }
        }

        // true residual governs convergence and the returned report
        let ax = op.apply(&x);
        applies += 1;
        r = vecops::sub(b, &ax);
        let true_rel = vecops::norm2(&r) / bnorm;

        if true_rel <= tol {
            return InnerSolveReport {
                solution: x,
                relres: true_rel,
                iterations: applies,
                converged: true,
            };
        }
        if applies >= maxit || j == 0 || !true_rel.is_finite() {
            return InnerSolveReport {
                solution: x,
                relres: true_rel,
                iterations: applies,
                converged: false,
            };
        }
    }
}

/// Givens rotation with real cosine: `[c s; -conj(s) c] [a; b] = [r; 0]`.
fn plane_rotation<T: Real>(a: Cx<T>, b: Cx<T>) -> (T, Cx<T>) {
    let bn = b.norm();
    if bn <= T::zero() {
        return (T::one(), Complex::new(T::zero(), T::zero()));
    }
    let an = a.norm();
    if an <= T::zero() {
        return (T::zero(), b.conj() / Complex::new(bn, T::zero()));
    }
    let d = (an * an + bn * bn).sqrt();
    let phase = a / Complex::new(an, T::zero());
    (an / d, phase * b.conj() / Complex::new(d, T::zero()))
}
