//! Brute-force dense oracles for the verification suite: LU solves, the
//! explicit shift-invert matrix, singular-value extremes, unitary
//! completions and the construction of randomized analysis probes.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::{orthonormalize_against, DenseError, DenseMatrix};
use crate::eig::{small_eig, RitzSet};
use crate::scalar::{Cx, Real};
use crate::vecops;

/// Dense LU with partial pivoting.
pub struct DenseLu<T: Real> {
    lu: DenseMatrix<T>,
    piv: Vec<usize>,
    n: usize,
}

impl<T: Real> DenseLu<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self, DenseError> {
        if !a.is_square() {
            return Err(DenseError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let mut p = k;
            let mut best = lu.get(k, k).norm();
            for i in k + 1..n {
                let v = lu.get(i, k).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= T::zero() {
                return Err(DenseError::Dimension(format!("singular at column {k}")));
            }
            piv.push(p);
            if p != k {
                for j in 0..n {
                    let a = lu.get(k, j);
                    let b = lu.get(p, j);
                    lu.set(k, j, b);
                    lu.set(p, j, a);
                }
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let m = lu.get(i, k) / pivot;
                lu.set(i, k, m);
                if m.norm() > T::zero() {
                    for j in k + 1..n {
                        let cur = lu.get(i, j);
                        lu.set(i, j, cur - m * lu.get(k, j));
                    }
                }
            }
        }
        Ok(Self { lu, piv, n })
    }

    pub fn solve(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        for k in 0..self.n {
            x.swap(k, self.piv[k]);
        }
        for i in 1..self.n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut acc = x[i];
            for j in i + 1..self.n {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc / self.lu.get(i, i);
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix<T> {
        let mut inv = DenseMatrix::zeros(self.n, self.n);
        let mut e = vecops::zeros(self.n);
        for j in 0..self.n {
            e[j] = Complex::new(T::one(), T::zero());
            let col = self.solve(&e);
            inv.col_mut(j).copy_from_slice(&col);
            e[j] = Complex::new(T::zero(), T::zero());
        }
        inv
    }
}

/// Largest and smallest singular values via the Hermitian eigenproblem of
/// `M^H M` solved with the dense QR eigensolver.
pub fn singular_extremes<T: Real>(m: &DenseMatrix<T>) -> Result<(T, T), DenseError> {
    let g = m.adjoint_mul(m);
    let eig = small_eig(&g)?;
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for v in &eig.values {
        let x = v.re.max(T::zero());
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok((hi.sqrt(), lo.sqrt()))
}

pub fn two_norm<T: Real>(m: &DenseMatrix<T>) -> Result<T, DenseError> {
    singular_extremes(m).map(|(hi, _)| hi)
}

/// `sep(alpha, L) = sigma_min(L - alpha I)`.
pub fn sep<T: Real>(l: &DenseMatrix<T>, alpha: Cx<T>) -> Result<T, DenseError> {
    let mut shifted = l.clone();
    shifted.shift_diag(alpha);
    singular_extremes(&shifted).map(|(_, lo)| lo)
}

pub fn randn_complex<T: Real>(rng: &mut ChaCha8Rng) -> Cx<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::real(re), T::real(im))
}

pub fn randn_vec<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Vec<Cx<T>> {
    (0..n).map(|_| randn_complex(rng)).collect()
}

pub fn random_unit_vec<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Vec<Cx<T>> {
    let mut v = randn_vec(n, rng);
    vecops::normalize(&mut v);
    v
}

/// Random unitary matrix from Gram-Schmidt on a Gaussian sample.
pub fn random_unitary<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<T> {
    let mut q = DenseMatrix::zeros(n, 0);
    while q.cols() < n {
        let u = randn_vec(n, rng);
        if let Ok((v, _)) = orthonormalize_against(&q, &u) {
            q.push_col(&v);
        }
    }
    q
}

/// Orthonormal basis of the orthogonal complement of a unit vector,
/// the trailing columns of a Householder reflector mapping `x` to `e_1`.
pub fn unitary_completion<T: Real>(x: &[Cx<T>]) -> DenseMatrix<T> {
    let n = x.len();
    debug_assert!((vecops::norm2(x) - T::one()).abs() <= T::real(1e-10));
    let x0 = x[0];
    let phase = if x0.norm() > T::zero() {
        x0 / Complex::new(x0.norm(), T::zero())
    } else {
        Complex::new(T::one(), T::zero())
    };
    let mut w = x.to_vec();
    w[0] -= phase;
    let wnorm2 = w.iter().fold(T::zero(), |s, v| s + v.norm_sqr());
    let mut out = DenseMatrix::zeros(n, n - 1);
    if wnorm2 <= T::epsilon() * T::real(16.0) {
        // x is already (a phase times) e_1
        for j in 1..n {
            out.set(j, j - 1, Complex::new(T::one(), T::zero()));
        }
        return out;
    }
    let two_over = T::two() / wnorm2;
    for j in 1..n {
        // column: e_j - (2 / ||w||^2) w conj(w_j)
        let coeff = w[j].conj().scale(two_over);
        for i in 0..n {
            let base = if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            };
            out.set(i, j - 1, base - w[i] * coeff);
        }
    }
    out
}

/// Parameters controlling probe construction.
#[derive(Debug, Clone)]
pub struct ProbeParams {
    pub n: usize,
    /// Basis dimension.
    pub m: usize,
    /// Relative error of the perturbed inner solution.
    pub eps: f64,
    /// Distance of the first basis vector from the target eigenvector.
    pub eta: f64,
    /// Strength of the strictly upper triangular part (non-normality).
    pub upper_scale: f64,
}

/// A randomized dense instance with oracle-exact target eigenpair, an
/// orthonormal test basis with its Ritz data, and a perturbation direction.
pub struct AnalysisProbe<T: Real> {
    pub a: DenseMatrix<T>,
    pub sigma: Cx<T>,
    /// Eigenvalue nearest sigma and its (oracle-exact) unit eigenvector.
    pub lambda: Cx<T>,
    pub x: Vec<Cx<T>>,
    pub v_basis: DenseMatrix<T>,
    pub h: DenseMatrix<T>,
    pub ritz: RitzSet<T>,
    pub nu: Cx<T>,
    pub y: Vec<Cx<T>>,
    /// Unit error-direction vector of the perturbed solution.
    pub f: Vec<Cx<T>>,
    pub eps: T,
}

/// Builds a probe: eigenvalues placed explicitly on a triangular matrix
/// (nearest one well separated from the rest), conjugated by a random
/// unitary similarity. The eigenvector of the nearest eigenvalue is exact
/// by construction.
pub fn generate_probe<T: Real>(params: &ProbeParams, rng: &mut ChaCha8Rng) -> AnalysisProbe<T> {
    let n = params.n;
    let m = params.m;
    assert!(m >= 2 && m < n);

    let sigma: Cx<T> = Complex::new(
        T::real(0.3 + 0.1 * (rng.gen::<f64>() - 0.5)),
        T::real(0.2 + 0.1 * (rng.gen::<f64>() - 0.5)),
    );

    // eigenvalue layout: |lambda_1 - sigma| ~ 0.3, the rest at >= 0.9
    let mut tri = DenseMatrix::zeros(n, n);
    let phi1 = rng.gen::<f64>() * std::f64::consts::TAU;
    let lambda = sigma + Complex::from_polar(T::real(0.3), T::real(phi1));
    tri.set(0, 0, lambda);
    for i in 1..n {
        let rho = 0.9 + 2.0 * rng.gen::<f64>();
        let phi = rng.gen::<f64>() * std::f64::consts::TAU;
        tri.set(i, i, sigma + Complex::from_polar(T::real(rho), T::real(phi)));
    }
    let scale = T::real(params.upper_scale);
    for j in 1..n {
        for i in 0..j {
            tri.set(i, j, randn_complex::<T>(rng).scale(scale));
        }
    }

    let q = random_unitary::<T>(n, rng);
    let a = q.matmul(&tri).matmul(&q.adjoint());
    let x = q.col(0).to_vec();

    // basis: first column near x, the rest random
    let mut v1 = x.clone();
    let g = random_unit_vec::<T>(n, rng);
    vecops::axpy(Complex::new(T::real(params.eta), T::zero()), &g, &mut v1);
    vecops::normalize(&mut v1);
    let mut v_basis = DenseMatrix::from_columns(n, &[v1]);
    while v_basis.cols() < m {
        let u = randn_vec::<T>(n, rng);
        if let Ok((v, _)) = orthonormalize_against(&v_basis, &u) {
            v_basis.push_col(&v);
        }
    }

    let av = a.matmul(&v_basis);
    let h = v_basis.adjoint_mul(&av);
    let mut ritz = small_eig(&h).expect("projected eigensolve");
    ritz.order_toward(sigma);
    let nu = ritz.values[0];
    let mut y = v_basis.matvec(ritz.vectors.col(0));
    vecops::normalize(&mut y);

    let f = random_unit_vec::<T>(n, rng);

    AnalysisProbe {
        a,
        sigma,
        lambda,
        x,
        v_basis,
        h,
        ritz,
        nu,
        y,
        f,
        eps: T::real(params.eps),
    }
}

/// Dense decomposition data around a probe: the explicit shift-invert
/// matrix, its extreme singular values, and the partition of `B` over the
/// unitary completion of the target eigenvector.
pub struct OracleEig<T: Real> {
    pub b: DenseMatrix<T>,
    pub b_norm: T,
    pub kappa_b: T,
    pub x_perp_basis: DenseMatrix<T>,
    /// `L = X_perp^H B X_perp`.
    pub l_mat: DenseMatrix<T>,
    /// `c` with `c^H = x^H B X_perp`.
    pub c_vec: Vec<Cx<T>>,
}

pub fn build_oracle<T: Real>(probe: &AnalysisProbe<T>) -> Result<OracleEig<T>, DenseError> {
    let mut shifted = probe.a.clone();
    shifted.shift_diag(probe.sigma);
    let lu = DenseLu::factor(&shifted)?;
    let b = lu.inverse();
    let (smax, smin) = singular_extremes(&shifted)?;
    let b_norm = smin.recip();
    let kappa_b = smax / smin;
    let x_perp_basis = unitary_completion(&probe.x);
    let bx_perp = b.matmul(&x_perp_basis);
    let l_mat = x_perp_basis.adjoint_mul(&bx_perp);
    let c_vec: Vec<Cx<T>> = (0..x_perp_basis.cols())
        .map(|j| vecops::dot(&probe.x, bx_perp.col(j)).conj())
        .collect();
    Ok(OracleEig {
        b,
        b_norm,
        kappa_b,
        x_perp_basis,
        l_mat,
        c_vec,
    })
}

/// Full dense eigen-decomposition of a probe matrix; validation helper.
pub fn full_eig<T: Real>(a: &DenseMatrix<T>) -> Result<RitzSet<T>, DenseError> {
    small_eig(a)
}
