//! Outer eigensolvers: exact/inexact SIRA, fixed-target Jacobi-Davidson and
//! exact/inexact shift-invert Arnoldi, their restarted versions, the
//! adaptive inner-tolerance rule and per-iteration telemetry.

use std::time::Instant;

use num_complex::Complex;
use thiserror::Error;

use crate::dense::{orthonormalize_against, orthonormalize_with_coeffs, rayleigh_update, DenseError, DenseMatrix};
use crate::eig::{small_eig, RitzSet};
use crate::gmres::{gmres_right, gmres_right_in_complement, InnerSolveReport, JdProjectedOperator, Preconditioner};
use crate::ilut::{ilut_factor, IlutError, IlutFactors, PrecondError, ProjectedPreconditioner};
use crate::scalar::{Cx, Real};
use crate::sparse::{ShiftedOperator, SparseMatrix};
use crate::vecops;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// SIRA with inner systems solved to 1e-14 ("exact").
    SiraExact,
    /// SIRA with the adaptive inner tolerance.
    Sira,
    /// Fixed-target Jacobi-Davidson with the adaptive inner tolerance.
    Jd,
    /// Shift-invert Arnoldi with inner systems solved to 1e-14.
    SiaExact,
    /// Shift-invert Arnoldi with the relaxed inner tolerance.
    SiaInexact,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SiraExact => "sira-exact",
            Method::Sira => "sira",
            Method::Jd => "jd",
            Method::SiaExact => "sia-exact",
            Method::SiaInexact => "sia-inexact",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().replace('_', "-").as_str() {
            "sira" => Ok(Method::Sira),
            "jd" => Ok(Method::Jd),
            "sira-exact" | "exact-sira" => Ok(Method::SiraExact),
            "sia-exact" | "exact-sia" => Ok(Method::SiaExact),
            "sia-inexact" | "inexact-sia" | "sia" => Ok(Method::SiaInexact),
            other => Err(format!(
                "unknown method '{other}' (expected sira, jd, sira-exact, sia-exact or sia-inexact)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InnerConfig<T: Real> {
    /// GMRES restart length.
    pub restart: usize,
    /// Cap on operator applications per inner solve.
    pub maxit: usize,
    /// ILUT drop tolerance for the preconditioner of A - sigma I.
    pub droptol: T,
    /// Inner tolerance used by the "exact" variants.
    pub exact_tol: T,
    /// Accuracy floor for the relaxed SIA tolerance.
    pub sia_floor: T,
    /// Outer-step budget in the relaxed SIA tolerance; defaults to m_max.
    pub m_budget: Option<usize>,
}

impl<T: Real> InnerConfig<T> {
    pub fn new(droptol: T) -> Self {
        Self {
            restart: 30,
            maxit: 300,
            droptol,
            exact_tol: T::real(1e-14),
            sia_floor: T::real(1e-14),
            m_budget: None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum StartVector<T: Real> {
    /// `(1/sqrt(n)) (1, ..., 1)^H`.
    UniformOnes,
    /// Random complex start from a seeded generator.
    Seeded(u64),
    Custom(Vec<Cx<T>>),
}

#[derive(Debug, Clone)]
pub struct OuterConfig<T: Real> {
    pub sigma: Cx<T>,
    /// Prescribed expansion-direction accuracy (epsilon-tilde).
    pub teps: T,
    /// Outer tolerance is `max(||A||_1, 1) * outer_tol_factor`.
    pub outer_tol_factor: T,
    /// Maximum outer iterations per cycle.
    pub m_max: usize,
    pub max_restarts: usize,
    pub method: Method,
    pub inner: InnerConfig<T>,
    pub start: StartVector<T>,
}

impl<T: Real> OuterConfig<T> {
    pub fn new(sigma: Cx<T>, method: Method) -> Self {
        Self {
            sigma,
            teps: T::real(1e-3),
            outer_tol_factor: T::real(1e-10),
            m_max: 30,
            max_restarts: 0,
            method,
            inner: InnerConfig::new(T::real(1e-3)),
            start: StartVector::UniformOnes,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.teps > T::zero() && self.teps < T::real(0.5)) {
            return Err(ConfigError::Teps(format!("{}", self.teps)));
        }
        if self.m_max < 2 {
            return Err(ConfigError::MMax(self.m_max));
        }
        if self.inner.restart < 1 {
            return Err(ConfigError::Restart(self.inner.restart));
        }
        if self.inner.droptol < T::zero() {
            return Err(ConfigError::Droptol(format!("{}", self.inner.droptol)));
        }
        if !(self.outer_tol_factor > T::zero()) {
            return Err(ConfigError::OuterTol(format!("{}", self.outer_tol_factor)));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("teps must lie in (0, 0.5), got {0}")]
    Teps(String),
    #[error("m_max must be at least 2, got {0}")]
    MMax(usize),
    #[error("inner restart must be at least 1, got {0}")]
    Restart(usize),
    #[error("droptol must be nonnegative, got {0}")]
    Droptol(String),
    #[error("outer tolerance factor must be positive, got {0}")]
    OuterTol(String),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ilut(#[from] IlutError),
    #[error(transparent)]
    Precond(#[from] PrecondError),
    #[error(transparent)]
    Dense(#[from] DenseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// The subspace became invariant before the tolerance was met.
    ConvergedByBreakdown,
    NotConverged,
}

#[derive(Debug, Clone)]
pub struct EigenPair<T: Real> {
    pub value: Cx<T>,
    pub vector: Vec<Cx<T>>,
    pub residual_norm: T,
}

/// One outer iteration of telemetry.
#[derive(Debug, Clone)]
pub struct IterationRecord<T: Real> {
    pub cycle: usize,
    /// 1-based outer index across the whole run.
    pub outer_index: usize,
    pub residual_norm: T,
    /// Inner tolerance used this step (zero on the terminal row).
    pub inner_tol: T,
    pub inner_iterations: usize,
    pub inner_converged: bool,
    /// The 0.1 cap bound on the adaptive tolerance this step.
    pub eps_capped: bool,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceRecord<T: Real> {
    pub iterations: Vec<IterationRecord<T>>,
    pub restarts: usize,
    pub status: SolveStatus,
    /// Outer convergence tolerance used for the run.
    pub tol: T,
    /// Timing buckets (seconds): small eigensolves, orthonormalization and
    /// projection updates, preconditioner construction, inner Krylov time.
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl<T: Real> ConvergenceRecord<T> {
    fn new(tol: T) -> Self {
        Self {
            iterations: Vec::new(),
            restarts: 0,
            status: SolveStatus::NotConverged,
            tol,
            t1: 0.0,
            t2: 0.0,
            t3: 0.0,
            t4: 0.0,
        }
    }

    /// Number of outer iterations.
    pub fn i_out(&self) -> usize {
        self.iterations.len()
    }

    /// Total inner iterations (operator applications inside the Krylov solver).
    pub fn i_inn(&self) -> usize {
        self.iterations.iter().map(|r| r.inner_iterations).sum()
    }

    /// Number of outer steps where the 0.1 cap bound the inner tolerance.
    pub fn i_cap(&self) -> usize {
        self.iterations.iter().filter(|r| r.eps_capped).count()
    }

    fn push(&mut self, row: IterationRecord<T>) {
        self.t1 += row.t1;
        self.t2 += row.t2;
        self.t3 += row.t3;
        self.t4 += row.t4;
        self.iterations.push(row);
    }
}

/// Adaptive inner tolerance: for m = 1 returns epsilon-tilde itself, else
/// `2 teps max_{i>=2} |(nu_i - sigma) / (nu_i - nu)|` capped at 0.1.
/// Returns the tolerance and whether the cap bound. A Ritz value repeated
/// at `nu` makes the ratio unbounded and the cap binds immediately.
pub fn compute_inner_tol<T: Real>(
    teps: T,
    ritz: &RitzSet<T>,
    sigma: Cx<T>,
    nu: Cx<T>,
    m: usize,
) -> (T, bool) {
    let cap = T::real(0.1);
    if m <= 1 {
        return (teps, false);
    }
    let mut best: Option<T> = None;
    for i in 1..m.min(ritz.len()) {
        let denom = (ritz.values[i] - nu).norm();
        if denom == T::zero() {
            return (cap, true);
        }
        let ratio = (ritz.values[i] - sigma).norm() / denom;
        best = Some(best.map_or(ratio, |b: T| b.max(ratio)));
    }
    match best {
        None => (cap, true),
        Some(ratio) => {
            let eps = T::two() * teps * ratio;
            if eps >= cap {
                (cap, true)
            } else {
                (eps.max(T::epsilon()), false)
            }
        }
    }
}

/// Relaxed inner tolerance for the inexact shift-invert Arnoldi method:
/// `min(0.1, max(floor, outer_tol / (m_budget * current_residual_norm)))`
/// with the default floor 1e-14, loosening as the outer residual shrinks.
/// Pass infinity for the residual on the first iteration to start at the
/// accuracy floor.
pub fn relaxed_sia_tol<T: Real>(outer_tol: T, m_budget: usize, current_residual_norm: T) -> T {
    relaxed_sia_tol_with_floor(outer_tol, m_budget, current_residual_norm, T::real(1e-14))
}

pub fn relaxed_sia_tol_with_floor<T: Real>(
    outer_tol: T,
    m_budget: usize,
    current_residual_norm: T,
    floor: T,
) -> T {
    let cap = T::real(0.1);
    let denom = T::from_usize(m_budget).unwrap_or_else(T::one) * current_residual_norm;
    let raw = if denom > T::zero() {
        outer_tol / denom
    } else {
        T::infinity()
    };
    raw.max(floor).min(cap)
}

/// One SIRA subspace expansion: solve `(A - sigma I) u = r` to relative
/// residual `eps` and orthonormalize against the basis.
/// `v_new` is `None` on orthonormalization breakdown (invariant subspace).
pub struct Expansion<T: Real> {
    pub v_new: Option<Vec<Cx<T>>>,
    pub report: InnerSolveReport<T>,
}

pub fn sira_expand<T: Real>(
    a: &SparseMatrix<T>,
    sigma: Cx<T>,
    v_basis: &DenseMatrix<T>,
    residual: &[Cx<T>],
    m_inv: &dyn Preconditioner<T>,
    eps: T,
    restart: usize,
    maxit: usize,
) -> Expansion<T> {
    let op = ShiftedOperator::new(a, sigma);
    let report = gmres_right(&op, residual, m_inv, eps, restart, maxit);
    let v_new = orthonormalize_against(v_basis, &report.solution)
        .ok()
        .map(|(v, _)| v);
    Expansion { v_new, report }
}

/// One Jacobi-Davidson expansion: solve the correction equation
/// `(I - y y^H)(A - sigma I)(I - y y^H) u = -r` for `u` orthogonal to `y`
/// and orthonormalize against the basis.
pub fn jd_expand<T: Real>(
    a: &SparseMatrix<T>,
    sigma: Cx<T>,
    v_basis: &DenseMatrix<T>,
    y: &[Cx<T>],
    residual: &[Cx<T>],
    proj_precond: &ProjectedPreconditioner<'_, T>,
    eps: T,
    restart: usize,
    maxit: usize,
) -> Expansion<T> {
    let op = JdProjectedOperator::new(a, sigma, y);
    let mut rhs: Vec<Cx<T>> = residual.iter().map(|v| -v).collect();
    // keep the starting residual exactly in the complement of y
    let c = vecops::dot(y, &rhs);
    vecops::axpy(-c, y, &mut rhs);
    let report = gmres_right_in_complement(&op, &rhs, proj_precond, eps, restart, maxit, y);
    let v_new = orthonormalize_against(v_basis, &report.solution)
        .ok()
        .map(|(v, _)| v);
    Expansion { v_new, report }
}

/// One shift-invert Arnoldi step: solve `(A - sigma I) u = v_m` against the
/// last basis vector and orthonormalize, returning the new Hessenberg
/// column of the projected shift-invert operator as a byproduct.
pub struct SiaExpansion<T: Real> {
    pub v_new: Option<Vec<Cx<T>>>,
    /// Projection coefficients `v_i^H u` (length m) and the subdiagonal.
    pub h_column: Vec<Cx<T>>,
    pub subdiag: T,
    pub report: InnerSolveReport<T>,
}

pub fn sia_step<T: Real>(
    a: &SparseMatrix<T>,
    sigma: Cx<T>,
    v_basis: &DenseMatrix<T>,
    m_inv: &dyn Preconditioner<T>,
    inner_tol: T,
    restart: usize,
    maxit: usize,
) -> SiaExpansion<T> {
    let op = ShiftedOperator::new(a, sigma);
    let m = v_basis.cols();
    let report = gmres_right(&op, v_basis.col(m - 1), m_inv, inner_tol, restart, maxit);
    let exp = orthonormalize_with_coeffs(v_basis, &report.solution);
    // on breakdown the solution lies in the span: the projection
    // coefficients still form a valid Hessenberg column with zero subdiagonal
    let subdiag = if exp.vector.is_some() {
        exp.norm_after
    } else {
        T::zero()
    };
    SiaExpansion {
        v_new: exp.vector,
        h_column: exp.coefficients,
        subdiag,
        report,
    }
}

struct Candidate<T: Real> {
    value: Cx<T>,
    vector: Vec<Cx<T>>,
    residual_norm: T,
}

enum CycleStatus {
    Converged,
    Breakdown,
    Exhausted,
}

struct CycleOutcome<T: Real> {
    status: CycleStatus,
    best: Candidate<T>,
}

struct PrecondState<T: Real> {
    factors: IlutFactors<T>,
    shift_perturbed: bool,
}

fn initial_vector<T: Real>(n: usize, start: &StartVector<T>) -> Vec<Cx<T>> {
    match start {
        StartVector::UniformOnes => {
            let scale = T::from_usize(n).unwrap().sqrt().recip();
            vec![Complex::new(scale, T::zero()); n]
        }
        StartVector::Seeded(seed) => {
            use rand::Rng;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut v: Vec<Cx<T>> = (0..n)
                .map(|_| {
                    Complex::new(
                        T::real(rng.gen::<f64>() - 0.5),
                        T::real(rng.gen::<f64>() - 0.5),
                    )
                })
                .collect();
            vecops::normalize(&mut v);
            v
        }
        StartVector::Custom(v) => {
            let mut v = v.clone();
            vecops::normalize(&mut v);
            v
        }
    }
}

fn seconds(from: Instant) -> f64 {
    from.elapsed().as_secs_f64()
}

/// Runs one cycle of a projection method (SIRA, exact SIRA or JD).
fn run_cycle_projection<T: Real>(
    a: &SparseMatrix<T>,
    cfg: &OuterConfig<T>,
    precond: &mut PrecondState<T>,
    v1: Vec<Cx<T>>,
    cycle: usize,
    tol: T,
    record: &mut ConvergenceRecord<T>,
) -> Result<CycleOutcome<T>, SolveError> {
    let n = a.n();
    let mut v_basis = DenseMatrix::zeros(n, 0);
    let mut h = DenseMatrix::zeros(0, 0);
    {
        let mut v = v1;
        vecops::normalize(&mut v);
        h = rayleigh_update(&h, &v_basis, a, &v);
        v_basis.push_col(&v);
    }
    let mut best: Option<Candidate<T>> = None;

    for m in 1..=cfg.m_max {
        let outer_index = record.i_out() + 1;
        let mut row = IterationRecord {
            cycle,
            outer_index,
            residual_norm: T::zero(),
            inner_tol: T::zero(),
            inner_iterations: 0,
            inner_converged: true,
            eps_capped: false,
            t1: 0.0,
            t2: 0.0,
            t3: 0.0,
            t4: 0.0,
        };

        let t1 = Instant::now();
        let mut ritz = small_eig(&h)?;
        ritz.order_toward(cfg.sigma);
        row.t1 += seconds(t1);

        let nu = ritz.values[0];
        let z = ritz.vectors.col(0).to_vec();
        let mut y = v_basis.matvec(&z);
        vecops::normalize(&mut y);
        let mut r = a.spmv(&y);
        vecops::axpy(-nu, &y, &mut r);
        let rnorm = vecops::norm2(&r);
        row.residual_norm = rnorm;

        if best.as_ref().map_or(true, |b| rnorm < b.residual_norm) {
            best = Some(Candidate {
                value: nu,
                vector: y.clone(),
                residual_norm: rnorm,
            });
        }

        if rnorm <= tol {
            record.push(row);
            return Ok(CycleOutcome {
                status: CycleStatus::Converged,
                best: best.unwrap(),
            });
        }
        if m == cfg.m_max {
            record.push(row);
            return Ok(CycleOutcome {
                status: CycleStatus::Exhausted,
                best: best.unwrap(),
            });
        }

        // nu numerically equal to sigma degenerates the tolerance formula;
        // perturb the copy used for tolerances only
        let nu_eff = if (nu - cfg.sigma).norm() == T::zero() {
            nu + Complex::new(T::real(1e-13) * (T::one() + cfg.sigma.norm()), T::zero())
        } else {
            nu
        };
        let (eps, capped) = match cfg.method {
            Method::SiraExact => (cfg.inner.exact_tol, false),
            _ => compute_inner_tol(cfg.teps, &ritz, cfg.sigma, nu_eff, m),
        };
        row.inner_tol = eps;
        row.eps_capped = capped;

        let expansion = match cfg.method {
            Method::Sira | Method::SiraExact => {
                let t4 = Instant::now();
                let exp = sira_expand(
                    a,
                    cfg.sigma,
                    &v_basis,
                    &r,
                    &precond.factors,
                    eps,
                    cfg.inner.restart,
                    cfg.inner.maxit,
                );
                row.t4 += seconds(t4);
                exp
            }
            Method::Jd => {
                let t3 = Instant::now();
                let proj = match ProjectedPreconditioner::new(&precond.factors, &y) {
                    Ok(p) => p,
                    Err(PrecondError::NearSingularProjection) if !precond.shift_perturbed => {
                        // sigma is numerically an eigenvalue: nudge the
                        // preconditioner shift once and refactor
                        let bump = T::real(1e-13) * (T::one() + cfg.sigma.norm());
                        let sigma_eff = cfg.sigma + Complex::new(bump, T::zero());
                        precond.factors = ilut_factor(a, sigma_eff, cfg.inner.droptol)?;
                        precond.shift_perturbed = true;
                        ProjectedPreconditioner::new(&precond.factors, &y)?
                    }
                    Err(e) => return Err(e.into()),
                };
                row.t3 += seconds(t3);
                let t4 = Instant::now();
                let exp = jd_expand(
                    a,
                    cfg.sigma,
                    &v_basis,
                    &y,
                    &r,
                    &proj,
                    eps,
                    cfg.inner.restart,
                    cfg.inner.maxit,
                );
                row.t4 += seconds(t4);
                exp
            }
            _ => unreachable!("SIA methods use run_cycle_sia"),
        };

        row.inner_iterations = expansion.report.iterations;
        row.inner_converged = expansion.report.converged;

        match expansion.v_new {
            Some(v_new) => {
                let t2 = Instant::now();
                h = rayleigh_update(&h, &v_basis, a, &v_new);
                v_basis.push_col(&v_new);
                row.t2 += seconds(t2);
                record.push(row);
            }
            None => {
                record.push(row);
                return Ok(CycleOutcome {
                    status: CycleStatus::Breakdown,
                    best: best.unwrap(),
                });
            }
        }
    }
    unreachable!("loop returns at m_max");
}

/// Runs one cycle of shift-invert Arnoldi (exact or relaxed inner solves).
fn run_cycle_sia<T: Real>(
    a: &SparseMatrix<T>,
    cfg: &OuterConfig<T>,
    precond: &PrecondState<T>,
    v1: Vec<Cx<T>>,
    cycle: usize,
    tol: T,
    record: &mut ConvergenceRecord<T>,
) -> Result<CycleOutcome<T>, SolveError> {
    let n = a.n();
    let exact = cfg.method == Method::SiaExact;
    let m_budget = cfg.inner.m_budget.unwrap_or(cfg.m_max);
    let mut v_basis = DenseMatrix::zeros(n, 0);
    {
        let mut v = v1;
        vecops::normalize(&mut v);
        v_basis.push_col(&v);
    }
    // growing Hessenberg projection of B = (A - sigma I)^{-1}
    let mut hb = DenseMatrix::zeros(cfg.m_max + 1, cfg.m_max);
    let mut best: Option<Candidate<T>> = None;
    let mut prev_rnorm: Option<T> = None;

    for m in 1..=cfg.m_max {
        let outer_index = record.i_out() + 1;
        let mut row = IterationRecord {
            cycle,
            outer_index,
            residual_norm: T::zero(),
            inner_tol: T::zero(),
            inner_iterations: 0,
            inner_converged: true,
            eps_capped: false,
            t1: 0.0,
            t2: 0.0,
            t3: 0.0,
            t4: 0.0,
        };

        let inner_tol = if exact {
            cfg.inner.exact_tol
        } else {
            relaxed_sia_tol_with_floor(
                tol,
                m_budget,
                prev_rnorm.unwrap_or_else(T::infinity),
                cfg.inner.sia_floor,
            )
        };
        row.inner_tol = inner_tol;

        let t4 = Instant::now();
        let step = sia_step(
            a,
            cfg.sigma,
            &v_basis,
            &precond.factors,
            inner_tol,
            cfg.inner.restart,
            cfg.inner.maxit,
        );
        row.t4 += seconds(t4);
        row.inner_iterations = step.report.iterations;
        row.inner_converged = step.report.converged;

        let breakdown = step.v_new.is_none();
        let t2 = Instant::now();
        for (i, c) in step.h_column.iter().enumerate() {
            hb.set(i, m - 1, *c);
        }
        hb.set(m, m - 1, Complex::new(step.subdiag, T::zero()));
        row.t2 += seconds(t2);

        // Ritz pairs of B from the square part of the recurrence
        let t1 = Instant::now();
        let mut hsq = DenseMatrix::zeros(m, m);
        for j in 0..m {
            for i in 0..m {
                hsq.set(i, j, hb.get(i, j));
            }
        }
        let ritz_b = small_eig(&hsq)?;
        row.t1 += seconds(t1);

        // eigenvalue of B largest in magnitude <-> eigenvalue of A nearest sigma
        let mut pick = 0usize;
        for i in 1..ritz_b.len() {
            if ritz_b.values[i].norm() > ritz_b.values[pick].norm() {
                pick = i;
            }
        }
        let theta = ritz_b.values[pick];
        let lam = if theta.norm() > T::zero() {
            cfg.sigma + Complex::new(T::one(), T::zero()) / theta
        } else {
            cfg.sigma
        };
        let w = ritz_b.vectors.col(pick);
        let mut y = vecops::zeros(n);
        for (j, wj) in w.iter().enumerate() {
            vecops::axpy(*wj, v_basis.col(j), &mut y);
        }
        vecops::normalize(&mut y);
        let mut r = a.spmv(&y);
        vecops::axpy(-lam, &y, &mut r);
        let rnorm = vecops::norm2(&r);
        row.residual_norm = rnorm;
        prev_rnorm = Some(rnorm);

        if best.as_ref().map_or(true, |b| rnorm < b.residual_norm) {
            best = Some(Candidate {
                value: lam,
                vector: y,
                residual_norm: rnorm,
            });
        }

        record.push(row);
        if rnorm <= tol {
            return Ok(CycleOutcome {
                status: CycleStatus::Converged,
                best: best.unwrap(),
            });
        }
        if breakdown {
            return Ok(CycleOutcome {
                status: CycleStatus::Breakdown,
                best: best.unwrap(),
            });
        }
        if m == cfg.m_max {
            return Ok(CycleOutcome {
                status: CycleStatus::Exhausted,
                best: best.unwrap(),
            });
        }
        v_basis.push_col(step.v_new.as_ref().unwrap());
    }
    unreachable!("loop returns at m_max");
}

fn run_cycle<T: Real>(
    a: &SparseMatrix<T>,
    cfg: &OuterConfig<T>,
    precond: &mut PrecondState<T>,
    v1: Vec<Cx<T>>,
    cycle: usize,
    tol: T,
    record: &mut ConvergenceRecord<T>,
) -> Result<CycleOutcome<T>, SolveError> {
    match cfg.method {
        Method::SiaExact | Method::SiaInexact => {
            run_cycle_sia(a, cfg, precond, v1, cycle, tol, record)
        }
        _ => run_cycle_projection(a, cfg, precond, v1, cycle, tol, record),
    }
}

/// Runs the selected method for a single cycle of at most `m_max` outer
/// iterations. Returns the converged pair, or the best candidate with a
/// not-converged status in the record.
pub fn run_solver<T: Real>(
    a: &SparseMatrix<T>,
    config: &OuterConfig<T>,
) -> Result<(EigenPair<T>, ConvergenceRecord<T>), SolveError> {
    let mut single = config.clone();
    single.max_restarts = 0;
    run_restarted(a, &single)
}

/// Restarted driver: cycles of `run_solver` with the basis reset to the
/// best candidate vector of the finished cycle (the Ritz vector minimizing
/// the residual norm over the cycle).
pub fn run_restarted<T: Real>(
    a: &SparseMatrix<T>,
    config: &OuterConfig<T>,
) -> Result<(EigenPair<T>, ConvergenceRecord<T>), SolveError> {
    config.validate()?;
    let tol = a.one_norm().max(T::one()) * config.outer_tol_factor;
    let mut record = ConvergenceRecord::new(tol);

    let t3 = Instant::now();
    let factors = ilut_factor(a, config.sigma, config.inner.droptol)?;
    record.t3 += seconds(t3);
    let mut precond = PrecondState {
        factors,
        shift_perturbed: false,
    };

    let mut v1 = initial_vector(a.n(), &config.start);
    let mut overall_best: Option<Candidate<T>> = None;

    for cycle in 0..=config.max_restarts {
        let outcome = run_cycle(a, config, &mut precond, v1, cycle, tol, &mut record)?;
        let better = overall_best
            .as_ref()
            .map_or(true, |b| outcome.best.residual_norm < b.residual_norm);
        let cycle_best = outcome.best;
        let restart_vector = cycle_best.vector.clone();
        if better {
            overall_best = Some(cycle_best);
        }
        match outcome.status {
            CycleStatus::Converged => {
                record.status = SolveStatus::Converged;
                break;
            }
            CycleStatus::Breakdown => {
                record.status = SolveStatus::ConvergedByBreakdown;
                break;
            }
            CycleStatus::Exhausted => {
                if cycle == config.max_restarts {
                    record.status = SolveStatus::NotConverged;
                } else {
                    record.restarts += 1;
                    v1 = restart_vector;
                    continue;
                }
            }
        }
        break;
    }

    let best = overall_best.expect("at least one outer iteration ran");
    let pair = EigenPair {
        value: best.value,
        vector: best.vector,
        residual_norm: best.residual_norm,
    };
    Ok((pair, record))
}
