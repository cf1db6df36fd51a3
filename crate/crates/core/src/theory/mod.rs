//! Numerical verification of the angle identities, error bounds and
//! equivalence results that justify the adaptive inner tolerances, on
//! dense randomized instances against brute-force oracles.

pub mod oracle;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dense::{project_out, subspace_sine, DenseMatrix};
use crate::eig::small_eig;
use crate::scalar::{Cx, Real};
use crate::vecops::{self, vector_cos, vector_sine};
use oracle::{
    build_oracle, generate_probe, sep, singular_extremes, unitary_completion, AnalysisProbe,
    DenseLu, OracleEig, ProbeParams,
};

/// Dense solve context for one probe: LU of `A - sigma I` and the
/// materialized shifted matrix.
pub struct ShiftContext<T: Real> {
    pub shifted: DenseMatrix<T>,
    pub lu: DenseLu<T>,
}

impl<T: Real> ShiftContext<T> {
    pub fn new(probe: &AnalysisProbe<T>) -> Self {
        let mut shifted = probe.a.clone();
        shifted.shift_diag(probe.sigma);
        let lu = DenseLu::factor(&shifted).expect("shifted probe matrix is nonsingular");
        Self { shifted, lu }
    }
}

fn residual_vector<T: Real>(probe: &AnalysisProbe<T>) -> Vec<Cx<T>> {
    let mut r = probe.a.matvec(&probe.y);
    vecops::axpy(-probe.nu, &probe.y, &mut r);
    r
}

fn tiny<T: Real>() -> T {
    T::real(1e-13)
}

/// Exact inner solution of the SIRA system and its projected direction.
struct ExactExpansion<T: Real> {
    u: Vec<Cx<T>>,
    w: Vec<Cx<T>>,
    wn: T,
}

fn exact_expansion<T: Real>(
    probe: &AnalysisProbe<T>,
    ctx: &ShiftContext<T>,
) -> Option<ExactExpansion<T>> {
    let r = residual_vector(probe);
    let u = ctx.lu.solve(&r);
    let w = project_out(&probe.v_basis, &u);
    let wn = vecops::norm2(&w);
    if wn <= tiny::<T>() * vecops::norm2(&u) {
        return None;
    }
    Some(ExactExpansion { u, w, wn })
}

/// Perturbed expansion data derived from `u_tilde = u + eps ||u|| f`.
struct PerturbedExpansion<T: Real> {
    w_tilde: Vec<Cx<T>>,
    teps_realized: T,
}

fn perturb<T: Real>(
    probe: &AnalysisProbe<T>,
    exact: &ExactExpansion<T>,
    eps: T,
) -> Option<PerturbedExpansion<T>> {
    let coeff = Complex::new(eps * vecops::norm2(&exact.u), T::zero());
    let mut u_tilde = exact.u.clone();
    vecops::axpy(coeff, &probe.f, &mut u_tilde);
    let w_tilde = project_out(&probe.v_basis, &u_tilde);
    if vecops::norm2(&w_tilde) <= T::zero() {
        return None;
    }
    let diff = vecops::sub(&w_tilde, &exact.w);
    let teps_realized = vecops::norm2(&diff) / exact.wn;
    Some(PerturbedExpansion {
        w_tilde,
        teps_realized,
    })
}

/// |sin(tv, v) - teps * sin(tv, f_perp)|: the one-step identity relating
/// the perturbed and exact expansion directions.
pub fn check_perturbed_direction_identity<T: Real>(probe: &AnalysisProbe<T>, ctx: &ShiftContext<T>) -> Option<T> {
    let exact = exact_expansion(probe, ctx)?;
    let pert = perturb(probe, &exact, probe.eps)?;
    let lhs = vector_sine(&pert.w_tilde, &exact.w);
    let f_perp = project_out(&probe.v_basis, &probe.f);
    let s2 = if vecops::norm2(&f_perp) > T::zero() {
        vector_sine(&pert.w_tilde, &f_perp)
    } else {
        T::zero()
    };
    Some((lhs - pert.teps_realized * s2).abs())
}

/// |sin(V+, x) - sin(V, x) sin(v, x_perp)|: one-step subspace improvement.
/// `None` marks the invariant-subspace event.
pub fn check_expansion_identity<T: Real>(
    probe: &AnalysisProbe<T>,
    ctx: &ShiftContext<T>,
) -> Option<T> {
    let exact = exact_expansion(probe, ctx)?;
    let mut v = exact.w.clone();
    vecops::scale_real(exact.wn.recip(), &mut v);
    let xp = project_out(&probe.v_basis, &probe.x);
    let xpn = vecops::norm2(&xp);
    let sin_v_x = xpn.min(T::one());
    let sin_v_xp = if xpn > T::zero() {
        vector_sine(&v, &xp)
    } else {
        T::zero()
    };
    let mut v_plus = probe.v_basis.clone();
    v_plus.push_col(&v);
    let lhs = subspace_sine(&v_plus, &probe.x).ok()?;
    Some((lhs - sin_v_x * sin_v_xp).abs())
}

/// Maximum residual of the telescoped product identity over an exact
/// subspace-expansion run of `steps` steps starting from the probe's v1.
pub fn check_telescoped_product<T: Real>(
    probe: &AnalysisProbe<T>,
    ctx: &ShiftContext<T>,
    steps: usize,
) -> T {
    let n = probe.a.rows();
    let v1 = probe.v_basis.col(0).to_vec();
    let mut basis = DenseMatrix::from_columns(n, std::slice::from_ref(&v1));
    let mut prod = vector_sine(&v1, &probe.x);
    let mut worst = T::zero();
    for _ in 0..steps {
        let av = probe.a.matmul(&basis);
        let h = basis.adjoint_mul(&av);
        let mut ritz = match small_eig(&h) {
            Ok(r) => r,
            Err(_) => break,
        };
        ritz.order_toward(probe.sigma);
        let nu = ritz.values[0];
        let mut y = basis.matvec(ritz.vectors.col(0));
        vecops::normalize(&mut y);
        let mut r = probe.a.matvec(&y);
        vecops::axpy(-nu, &y, &mut r);
        let u = ctx.lu.solve(&r);
        let w = project_out(&basis, &u);
        let wn = vecops::norm2(&w);
        if wn <= tiny::<T>() * vecops::norm2(&u) {
            break;
        }
        let mut v = w;
        vecops::scale_real(wn.recip(), &mut v);
        let xp = project_out(&basis, &probe.x);
        let factor = if vecops::norm2(&xp) > T::zero() {
            vector_sine(&v, &xp)
        } else {
            T::zero()
        };
        prod = prod * factor;
        basis.push_col(&v);
        let direct = subspace_sine(&basis, &probe.x).expect("x is nonzero");
        worst = worst.max((direct - prod).abs());
    }
    worst
}

/// Outcome of the two-sided subspace-quality bound on one probe.
pub enum TauOutcome<T: Real> {
    Admissible { ratio: T, tau: T, ok: bool },
    Skipped,
}

/// Verifies `1 - tau <= sin(V~+, x)/sin(V+, x) <= 1 + tau` with
/// `tau = 2 teps / sin(v, x_perp)` on probes satisfying the hypotheses.
pub fn check_tau_bounds<T: Real>(probe: &AnalysisProbe<T>, ctx: &ShiftContext<T>) -> TauOutcome<T> {
    let Some(exact) = exact_expansion(probe, ctx) else {
        return TauOutcome::Skipped;
    };
    let mut v = exact.w.clone();
    vecops::scale_real(exact.wn.recip(), &mut v);
    let xp = project_out(&probe.v_basis, &probe.x);
    if vecops::norm2(&xp) <= T::zero() {
        return TauOutcome::Skipped;
    }
    let sin_v_xp = vector_sine(&v, &xp);
    if sin_v_xp <= T::zero() {
        return TauOutcome::Skipped;
    }
    let Some(pert) = perturb(probe, &exact, probe.eps) else {
        return TauOutcome::Skipped;
    };
    let tau = T::two() * pert.teps_realized / sin_v_xp;
    if tau >= T::one() {
        return TauOutcome::Skipped;
    }
    let mut v_tilde = pert.w_tilde.clone();
    vecops::normalize(&mut v_tilde);
    if vector_cos(&v_tilde, &v) <= T::zero() {
        return TauOutcome::Skipped;
    }
    let mut v_plus = probe.v_basis.clone();
    v_plus.push_col(&v);
    let mut v_plus_tilde = probe.v_basis.clone();
    v_plus_tilde.push_col(&v_tilde);
    let den = subspace_sine(&v_plus, &probe.x).expect("x nonzero");
    if den <= T::zero() {
        return TauOutcome::Skipped;
    }
    let num = subspace_sine(&v_plus_tilde, &probe.x).expect("x nonzero");
    let ratio = num / den;
    let slack = T::real(1e-12);
    let ok = ratio >= T::one() - tau - slack && ratio <= T::one() + tau + slack;
    TauOutcome::Admissible { ratio, tau, ok }
}

/// Chooses the perturbation size to realize a prescribed tau and returns
/// (ratio, realized tau); used by the calibration criterion.
pub fn calibrated_tau_ratio<T: Real>(
    probe: &AnalysisProbe<T>,
    ctx: &ShiftContext<T>,
    tau_target: T,
) -> Option<(T, T)> {
    let exact = exact_expansion(probe, ctx)?;
    let mut v = exact.w.clone();
    vecops::scale_real(exact.wn.recip(), &mut v);
    let xp = project_out(&probe.v_basis, &probe.x);
    if vecops::norm2(&xp) <= T::zero() {
        return None;
    }
    let sin_v_xp = vector_sine(&v, &xp);
    if sin_v_xp <= T::zero() {
        return None;
    }
    let f_perp = project_out(&probe.v_basis, &probe.f);
    let fpn = vecops::norm2(&f_perp);
    if fpn <= T::zero() {
        return None;
    }
    let teps_target = tau_target * sin_v_xp / T::two();
    let eps_use = teps_target * exact.wn / (vecops::norm2(&exact.u) * fpn);
    let pert = perturb(probe, &exact, eps_use)?;
    let tau = T::two() * pert.teps_realized / sin_v_xp;
    if tau >= T::one() {
        return None;
    }
    let mut v_tilde = pert.w_tilde.clone();
    vecops::normalize(&mut v_tilde);
    let mut v_plus = probe.v_basis.clone();
    v_plus.push_col(&v);
    let mut v_plus_tilde = probe.v_basis.clone();
    v_plus_tilde.push_col(&v_tilde);
    let den = subspace_sine(&v_plus, &probe.x).ok()?;
    if den <= T::zero() {
        return None;
    }
    let num = subspace_sine(&v_plus_tilde, &probe.x).ok()?;
    Some((num / den, tau))
}

/// Per-probe outcome of the accuracy-requirement bounds.
pub struct EpsBoundOutcome<T: Real> {
    /// eps <= 2 ||B|| sin(y,x) / (||By - a y|| sin(V,f)) teps, both alphas.
    pub eps_angle_bound_violations: usize,
    /// eps <= 2 ||B|| / (sep(a, L) sin(V,f)) teps, both alphas.
    pub eps_sep_bound_violations: usize,
    /// sin(y,x) <= ||By - a y|| / sep(a, L), both alphas.
    pub ritz_angle_bound_violations: usize,
    /// ||(I-P)By|| <= 2 ||B|| sin(y,x).
    pub expansion_norm_bound_violations: usize,
    /// |cos(v, x_perp)| <= 2 ||B|| sin(y,x) / ||(I-P)By||.
    pub expansion_cos_bound_violations: usize,
    /// y^H B y minimizes ||By - a y|| among sampled alphas.
    pub optimal_alpha_violations: usize,
    pub sep_sira: T,
    pub sep_jd: T,
    /// Smallest observed bound/value ratios (how tight each bound ran).
    pub min_eps_angle_slack: T,
    pub min_eps_sep_slack: T,
    pub min_ritz_angle_slack: T,
}

const INEQ_SLACK: f64 = 1e-8;

/// Evaluates both sides of the accuracy-requirement bounds (residual- and
/// separation-scaled), the Ritz-angle bound and the `(I-P)By` inequalities
/// from the dense oracle. `None` rejects the probe (alpha numerically an
/// eigenvalue of `L`, or a degenerate denominator).
pub fn check_eps_bound<T: Real>(
    probe: &AnalysisProbe<T>,
    oc: &OracleEig<T>,
    rng: &mut ChaCha8Rng,
) -> Option<EpsBoundOutcome<T>> {
    let slack = T::one() + T::real(INEQ_SLACK);
    let by = oc.b.matvec(&probe.y);
    let alpha_s = (probe.nu - probe.sigma).finv();
    let alpha_j = vecops::dot(&probe.y, &by);
    if (probe.nu - probe.sigma).norm() <= T::zero() {
        return None;
    }

    let sin_yx = vector_sine(&probe.y, &probe.x);
    let sin_vf = subspace_sine(&probe.v_basis, &probe.f).ok()?;
    if sin_vf <= T::zero() {
        return None;
    }

    let mut out = EpsBoundOutcome {
        eps_angle_bound_violations: 0,
        eps_sep_bound_violations: 0,
        ritz_angle_bound_violations: 0,
        expansion_norm_bound_violations: 0,
        expansion_cos_bound_violations: 0,
        optimal_alpha_violations: 0,
        sep_sira: T::zero(),
        sep_jd: T::zero(),
        min_eps_angle_slack: T::infinity(),
        min_eps_sep_slack: T::infinity(),
        min_ritz_angle_slack: T::infinity(),
    };

    for (which, alpha) in [(0usize, alpha_s), (1, alpha_j)] {
        let mut dev = by.clone();
        vecops::axpy(-alpha, &probe.y, &mut dev);
        let residual_b = vecops::norm2(&dev);
        if residual_b <= tiny::<T>() * oc.b_norm {
            return None;
        }
        let sep_a = sep(&oc.l_mat, alpha).ok()?;
        if sep_a <= T::real(1e-10) * oc.b_norm.recip().max(T::one()) {
            // alpha numerically an eigenvalue of L
            return None;
        }
        if which == 0 {
            out.sep_sira = sep_a;
        } else {
            out.sep_jd = sep_a;
        }

        // unified exact solution u = alpha_1 B y + y with alpha = -1/alpha_1
        let alpha_1 = -alpha.finv();
        let mut u = probe.y.clone();
        vecops::axpy(alpha_1, &by, &mut u);
        let w = project_out(&probe.v_basis, &u);
        let wn = vecops::norm2(&w);
        if wn <= tiny::<T>() * vecops::norm2(&u) {
            return None;
        }
        let f_perp = project_out(&probe.v_basis, &probe.f);
        let teps_realized = probe.eps * vecops::norm2(&u) * vecops::norm2(&f_perp) / wn;

        let angle_rhs =
            T::two() * oc.b_norm * sin_yx / (residual_b * sin_vf) * teps_realized;
        if probe.eps > angle_rhs * slack {
            out.eps_angle_bound_violations += 1;
        }
        if probe.eps > T::zero() {
            out.min_eps_angle_slack = out.min_eps_angle_slack.min(angle_rhs / probe.eps);
        }
        let sep_rhs = T::two() * oc.b_norm / (sep_a * sin_vf) * teps_realized;
        if probe.eps > sep_rhs * slack {
            out.eps_sep_bound_violations += 1;
        }
        if probe.eps > T::zero() {
            out.min_eps_sep_slack = out.min_eps_sep_slack.min(sep_rhs / probe.eps);
        }
        let ritz_rhs = residual_b / sep_a;
        if sin_yx > ritz_rhs * slack {
            out.ritz_angle_bound_violations += 1;
        }
        if sin_yx > T::zero() {
            out.min_ritz_angle_slack = out.min_ritz_angle_slack.min(ritz_rhs / sin_yx);
        }
    }

    // direction bounds shared by both alphas
    let pby = project_out(&probe.v_basis, &by);
    let pby_norm = vecops::norm2(&pby);
    if pby_norm > T::two() * oc.b_norm * sin_yx * slack {
        out.expansion_norm_bound_violations += 1;
    }
    let xp = project_out(&probe.v_basis, &probe.x);
    if vecops::norm2(&xp) > T::zero() && pby_norm > T::zero() {
        let cos_v_xp = vector_cos(&pby, &xp);
        if cos_v_xp > T::two() * oc.b_norm * sin_yx / pby_norm * slack {
            out.expansion_cos_bound_violations += 1;
        }
    }

    // alpha = y^H B y minimizes ||By - alpha y|| (1-D least squares)
    let mut best_dev = by.clone();
    vecops::axpy(-alpha_j, &probe.y, &mut best_dev);
    let best = vecops::norm2(&best_dev);
    for mag in [1e-2, 1e-5] {
        let delta = oracle::randn_complex::<T>(rng)
            .scale(T::real(mag) * alpha_j.norm().max(T::one()));
        let mut dev = by.clone();
        vecops::axpy(-(alpha_j + delta), &probe.y, &mut dev);
        if vecops::norm2(&dev) < best / slack {
            out.optimal_alpha_violations += 1;
        }
    }

    Some(out)
}

/// Per-probe outcome of the relative-error vs relative-residual sandwich.
pub struct SandwichOutcome {
    pub sira_violation: bool,
    pub jd_violation: bool,
}

pub fn check_residual_sandwich<T: Real>(
    probe: &AnalysisProbe<T>,
    oc: &OracleEig<T>,
    ctx: &ShiftContext<T>,
) -> Option<SandwichOutcome> {
    let slack = T::one() + T::real(INEQ_SLACK);
    let r = residual_vector(probe);
    let rnorm = vecops::norm2(&r);
    if rnorm <= T::zero() {
        return None;
    }
    // SIRA side: kappa(B) = kappa(A - sigma I)
    let u = ctx.lu.solve(&r);
    let relerr = probe.eps;
    let coeff = Complex::new(relerr * vecops::norm2(&u), T::zero());
    let mut u_tilde = u.clone();
    vecops::axpy(coeff, &probe.f, &mut u_tilde);
    let mut res = ctx.shifted.matvec(&u_tilde);
    res = vecops::sub(&r, &res);
    let relres = vecops::norm2(&res) / rnorm;
    let kappa = oc.kappa_b;
    let sira_violation = !(relres <= kappa * relerr * slack && relres >= relerr / kappa / slack);

    // JD side: the system restricted to the complement of y
    let yp = unitary_completion(&probe.y);
    let c_mat = yp.adjoint_mul(&ctx.shifted.matmul(&yp));
    let c_lu = DenseLu::factor(&c_mat).ok()?;
    let minus_r: Vec<Cx<T>> = r.iter().map(|v| -v).collect();
    let b_c = yp.adjoint_vec(&minus_r);
    let w = c_lu.solve(&b_c);
    let u_j = yp.matvec(&w);
    // perturbation direction inside the complement
    let mut f_y = probe.f.clone();
    let cy = vecops::dot(&probe.y, &f_y);
    vecops::axpy(-cy, &probe.y, &mut f_y);
    let f_y_norm = vecops::normalize(&mut f_y);
    if f_y_norm <= T::zero() {
        return None;
    }
    let mut u_j_tilde = u_j.clone();
    vecops::axpy(
        Complex::new(relerr * vecops::norm2(&u_j), T::zero()),
        &f_y,
        &mut u_j_tilde,
    );
    // residual of the projected system
    let mut pu = u_j_tilde.clone();
    let c1 = vecops::dot(&probe.y, &pu);
    vecops::axpy(-c1, &probe.y, &mut pu);
    let mut t = ctx.shifted.matvec(&pu);
    let c2 = vecops::dot(&probe.y, &t);
    vecops::axpy(-c2, &probe.y, &mut t);
    let mut res_j = minus_r;
    res_j = vecops::sub(&res_j, &t);
    let relres_j = vecops::norm2(&res_j) / rnorm;
    let (smax, smin) = singular_extremes(&c_mat).ok()?;
    if smin <= T::zero() {
        return None;
    }
    let kappa_j = smax / smin;
    let jd_violation =
        !(relres_j <= kappa_j * relerr * slack && relres_j >= relerr / kappa_j / slack);

    Some(SandwichOutcome {
        sira_violation,
        jd_violation,
    })
}

/// Collinearity of the three expansion directions, the gamma identity and
/// the closed form of the exact SIRA solution.
pub struct EquivalenceOutcome<T: Real> {
    pub max_collinearity_sine: T,
    pub scaled_identity_rel: T,
    pub gamma_rel_err: T,
    pub u_s_identity_rel: T,
    pub y_h_uj: T,
}

pub fn check_equivalence<T: Real>(
    probe: &AnalysisProbe<T>,
    ctx: &ShiftContext<T>,
) -> Option<EquivalenceOutcome<T>> {
    if (probe.sigma - probe.nu).norm() <= tiny::<T>() {
        return None;
    }
    let r = residual_vector(probe);
    let u_s = ctx.lu.solve(&r);
    let by = ctx.lu.solve(&probe.y);
    let y_h_by = vecops::dot(&probe.y, &by);
    if y_h_by.norm() <= T::zero() {
        return None;
    }
    let gamma = y_h_by.finv();

    // correction-equation solution through the compressed system
    let yp = unitary_completion(&probe.y);
    let c_mat = yp.adjoint_mul(&ctx.shifted.matmul(&yp));
    let c_lu = DenseLu::factor(&c_mat).ok()?;
    let minus_r: Vec<Cx<T>> = r.iter().map(|v| -v).collect();
    let b_c = yp.adjoint_vec(&minus_r);
    let w = c_lu.solve(&b_c);
    let u_j = yp.matvec(&w);

    let d_by = project_out(&probe.v_basis, &by);
    let d_s = project_out(&probe.v_basis, &u_s);
    let d_j = project_out(&probe.v_basis, &u_j);
    let d_by_norm = vecops::norm2(&d_by);
    if d_by_norm <= tiny::<T>() * vecops::norm2(&by) {
        return None;
    }

    let s1 = vector_sine(&d_by, &d_s);
    let s2 = vector_sine(&d_by, &d_j);
    let s3 = vector_sine(&d_s, &d_j);
    let max_collinearity_sine = s1.max(s2).max(s3);

    // scaled identity: (I-P)By = (I-P)u_S / (sigma - nu) = (I-P)u_J / gamma
    let inv_sn = (probe.sigma - probe.nu).finv();
    let mut diff_s = d_by.clone();
    let mut scaled_s = d_s.clone();
    vecops::scale(inv_sn, &mut scaled_s);
    diff_s = vecops::sub(&diff_s, &scaled_s);
    let mut diff_j = d_by.clone();
    let mut scaled_j = d_j.clone();
    vecops::scale(gamma.finv(), &mut scaled_j);
    diff_j = vecops::sub(&diff_j, &scaled_j);
    let scaled_identity_rel =
        (vecops::norm2(&diff_s) / d_by_norm).max(vecops::norm2(&diff_j) / d_by_norm);

    // gamma = y^H (A - sigma I) u_J - sigma + nu
    let au_j = ctx.shifted.matvec(&u_j);
    let gamma_alt = vecops::dot(&probe.y, &au_j) - probe.sigma + probe.nu;
    let gamma_rel_err = (gamma_alt - gamma).norm() / gamma.norm();

    // u_S = (sigma - nu) B y + y
    let mut u_s_ref = probe.y.clone();
    vecops::axpy(probe.sigma - probe.nu, &by, &mut u_s_ref);
    let u_s_identity_rel =
        vecops::norm2(&vecops::sub(&u_s, &u_s_ref)) / vecops::norm2(&u_s);

    let y_h_uj = vecops::dot(&probe.y, &u_j).norm();

    Some(EquivalenceOutcome {
        max_collinearity_sine,
        scaled_identity_rel,
        gamma_rel_err,
        u_s_identity_rel,
        y_h_uj,
    })
}

// ---------------------------------------------------------------------------
// suite drivers
// ---------------------------------------------------------------------------

fn splitmix(seed: u64, i: u64) -> u64 {
    let mut z = seed
        .wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Probe sizes cycle through n = 40 (x6), 80 (x3), 160 (x1) per block of
/// ten so large instances stay affordable.
fn probe_params(i: usize) -> ProbeParams {
    let n = match i % 10 {
        0..=5 => 40,
        6..=8 => 80,
        _ => 160,
    };
    let m = 3 + (i % 4);
    let eps = [1e-1, 1e-3][i % 2];
    let eta = [0.5, 0.3, 0.1, 0.05][(i / 2) % 4];
    ProbeParams {
        n,
        m,
        eps,
        eta,
        upper_scale: 0.3,
    }
}

#[derive(Debug, Clone)]
pub struct IdentityReport<T: Real> {
    pub probes: usize,
    pub skipped: usize,
    pub direction_identity_max: T,
    pub expansion_max: T,
    pub telescoped_max: T,
    pub equivalence_max_sine: T,
    pub equivalence_scaled_max: T,
    pub gamma_max_rel: T,
    pub u_s_identity_max: T,
    pub y_h_uj_max: T,
}

impl<T: Real> IdentityReport<T> {
    pub fn passes(&self) -> bool {
        self.direction_identity_max <= T::real(1e-10)
            && self.expansion_max <= T::real(1e-12)
            && self.telescoped_max <= T::real(1e-12)
            && self.equivalence_max_sine <= T::real(1e-10)
            && self.equivalence_scaled_max <= T::real(1e-10)
            && self.gamma_max_rel <= T::real(1e-10)
            && self.u_s_identity_max <= T::real(1e-10)
            && self.y_h_uj_max <= T::real(1e-12)
    }
}

/// Runs the identity checks (expansion-direction identity, subspace
/// improvement, telescoped product, exact-method equivalence) over seeded
/// random probes and reports worst-case residuals.
pub fn run_identity_suite<T: Real>(probes: usize, seed: u64) -> IdentityReport<T> {
    let zero = IdentityReport {
        probes: 0,
        skipped: 0,
        direction_identity_max: T::zero(),
        expansion_max: T::zero(),
        telescoped_max: T::zero(),
        equivalence_max_sine: T::zero(),
        equivalence_scaled_max: T::zero(),
        gamma_max_rel: T::zero(),
        u_s_identity_max: T::zero(),
        y_h_uj_max: T::zero(),
    };
    (0..probes)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, i as u64));
            let probe = generate_probe::<T>(&probe_params(i), &mut rng);
            let ctx = ShiftContext::new(&probe);
            let mut rep = zero.clone();
            rep.probes = 1;
            let mut skipped = false;
            match check_perturbed_direction_identity(&probe, &ctx) {
                Some(res) => rep.direction_identity_max = res,
                None => skipped = true,
            }
            match check_expansion_identity(&probe, &ctx) {
                Some(res) => rep.expansion_max = res,
                None => skipped = true,
            }
            rep.telescoped_max = check_telescoped_product(&probe, &ctx, 5);
            match check_equivalence(&probe, &ctx) {
                Some(eq) => {
                    rep.equivalence_max_sine = eq.max_collinearity_sine;
                    rep.equivalence_scaled_max = eq.scaled_identity_rel;
                    rep.gamma_max_rel = eq.gamma_rel_err;
                    rep.u_s_identity_max = eq.u_s_identity_rel;
                    rep.y_h_uj_max = eq.y_h_uj;
                }
                None => skipped = true,
            }
            rep.skipped = usize::from(skipped);
            rep
        })
        .reduce(
            || zero.clone(),
            |a, b| IdentityReport {
                probes: a.probes + b.probes,
                skipped: a.skipped + b.skipped,
                direction_identity_max: a.direction_identity_max.max(b.direction_identity_max),
                expansion_max: a.expansion_max.max(b.expansion_max),
                telescoped_max: a.telescoped_max.max(b.telescoped_max),
                equivalence_max_sine: a.equivalence_max_sine.max(b.equivalence_max_sine),
                equivalence_scaled_max: a.equivalence_scaled_max.max(b.equivalence_scaled_max),
                gamma_max_rel: a.gamma_max_rel.max(b.gamma_max_rel),
                u_s_identity_max: a.u_s_identity_max.max(b.u_s_identity_max),
                y_h_uj_max: a.y_h_uj_max.max(b.y_h_uj_max),
            },
        )
}

#[derive(Debug, Clone)]
pub struct InequalityReport<T: Real> {
    pub probes: usize,
    pub admissible: usize,
    pub rejected: usize,
    pub tau_skipped: usize,
    pub eps_angle_bound_violations: usize,
    pub eps_sep_bound_violations: usize,
    pub ritz_angle_bound_violations: usize,
    pub expansion_norm_bound_violations: usize,
    pub expansion_cos_bound_violations: usize,
    pub optimal_alpha_violations: usize,
    pub tau_violations: usize,
    pub sandwich_violations: usize,
    pub max_tau: T,
    /// Tightest observed bound/value ratios across all admissible probes.
    pub min_eps_angle_slack: T,
    pub min_eps_sep_slack: T,
    pub min_ritz_angle_slack: T,
}

impl<T: Real> InequalityReport<T> {
    pub fn violations(&self) -> usize {
        self.eps_angle_bound_violations
            + self.eps_sep_bound_violations
            + self.ritz_angle_bound_violations
            + self.expansion_norm_bound_violations
            + self.expansion_cos_bound_violations
            + self.optimal_alpha_violations
            + self.tau_violations
            + self.sandwich_violations
    }

    pub fn passes(&self) -> bool {
        self.violations() == 0
    }
}

/// Runs every inequality check (accuracy bounds, Ritz-angle bound, tau
/// bounds, residual sandwich, direction bounds) over seeded random probes.
pub fn run_inequality_suite<T: Real>(probes: usize, seed: u64) -> InequalityReport<T> {
    let zero = InequalityReport {
        probes: 0,
        admissible: 0,
        rejected: 0,
        tau_skipped: 0,
        eps_angle_bound_violations: 0,
        eps_sep_bound_violations: 0,
        ritz_angle_bound_violations: 0,
        expansion_norm_bound_violations: 0,
        expansion_cos_bound_violations: 0,
        optimal_alpha_violations: 0,
        tau_violations: 0,
        sandwich_violations: 0,
        max_tau: T::zero(),
        min_eps_angle_slack: T::infinity(),
        min_eps_sep_slack: T::infinity(),
        min_ritz_angle_slack: T::infinity(),
    };
    (0..probes)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed.wrapping_add(1), i as u64));
            let probe = generate_probe::<T>(&probe_params(i), &mut rng);
            let ctx = ShiftContext::new(&probe);
            let mut rep = zero.clone();
            rep.probes = 1;
            let oc = match build_oracle(&probe) {
                Ok(oc) => oc,
                Err(_) => {
                    rep.rejected = 1;
                    return rep;
                }
            };
            let mut admissible = false;
            match check_eps_bound(&probe, &oc, &mut rng) {
                Some(out) => {
                    admissible = true;
                    rep.eps_angle_bound_violations = out.eps_angle_bound_violations;
                    rep.eps_sep_bound_violations = out.eps_sep_bound_violations;
                    rep.ritz_angle_bound_violations = out.ritz_angle_bound_violations;
                    rep.expansion_norm_bound_violations = out.expansion_norm_bound_violations;
                    rep.expansion_cos_bound_violations = out.expansion_cos_bound_violations;
                    rep.optimal_alpha_violations = out.optimal_alpha_violations;
                    rep.min_eps_angle_slack = out.min_eps_angle_slack;
                    rep.min_eps_sep_slack = out.min_eps_sep_slack;
                    rep.min_ritz_angle_slack = out.min_ritz_angle_slack;
                }
                None => rep.rejected = 1,
            }
            match check_tau_bounds(&probe, &ctx) {
                TauOutcome::Admissible { tau, ok, .. } => {
                    admissible = true;
                    rep.max_tau = tau;
                    if !ok {
                        rep.tau_violations = 1;
                    }
                }
                TauOutcome::Skipped => rep.tau_skipped = 1,
            }
            if let Some(s) = check_residual_sandwich(&probe, &oc, &ctx) {
                admissible = true;
                if s.sira_violation || s.jd_violation {
                    rep.sandwich_violations = 1;
                }
            }
            rep.admissible = usize::from(admissible);
            rep
        })
        .reduce(
            || zero.clone(),
            |a, b| InequalityReport {
                probes: a.probes + b.probes,
                admissible: a.admissible + b.admissible,
                rejected: a.rejected + b.rejected,
                tau_skipped: a.tau_skipped + b.tau_skipped,
                eps_angle_bound_violations: a.eps_angle_bound_violations + b.eps_angle_bound_violations,
                eps_sep_bound_violations: a.eps_sep_bound_violations + b.eps_sep_bound_violations,
                ritz_angle_bound_violations: a.ritz_angle_bound_violations + b.ritz_angle_bound_violations,
                expansion_norm_bound_violations: a.expansion_norm_bound_violations + b.expansion_norm_bound_violations,
                expansion_cos_bound_violations: a.expansion_cos_bound_violations + b.expansion_cos_bound_violations,
                optimal_alpha_violations: a.optimal_alpha_violations
                    + b.optimal_alpha_violations,
                tau_violations: a.tau_violations + b.tau_violations,
                sandwich_violations: a.sandwich_violations + b.sandwich_violations,
                max_tau: a.max_tau.max(b.max_tau),
                min_eps_angle_slack: a.min_eps_angle_slack.min(b.min_eps_angle_slack),
                min_eps_sep_slack: a.min_eps_sep_slack.min(b.min_eps_sep_slack),
                min_ritz_angle_slack: a.min_ritz_angle_slack.min(b.min_ritz_angle_slack),
            },
        )
}

#[derive(Debug, Clone)]
pub struct TauCalibrationReport<T: Real> {
    pub probes: usize,
    pub admissible: usize,
    pub min_ratio: T,
    pub max_ratio: T,
}

impl<T: Real> TauCalibrationReport<T> {
    pub fn passes(&self) -> bool {
        self.admissible > 0 && self.min_ratio >= T::real(0.99) && self.max_ratio <= T::real(1.01)
    }
}

/// Constructs probes with realized tau = 0.01 and records the spread of the
/// subspace-quality ratio.
pub fn run_tau_calibration<T: Real>(probes: usize, seed: u64) -> TauCalibrationReport<T> {
    let zero = TauCalibrationReport {
        probes: 0,
        admissible: 0,
        min_ratio: T::infinity(),
        max_ratio: T::zero(),
    };
    (0..probes)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed.wrapping_add(2), i as u64));
            let probe = generate_probe::<T>(&probe_params(i), &mut rng);
            let ctx = ShiftContext::new(&probe);
            let mut rep = zero.clone();
            rep.probes = 1;
            if let Some((ratio, _tau)) = calibrated_tau_ratio(&probe, &ctx, T::real(0.01)) {
                rep.admissible = 1;
                rep.min_ratio = ratio;
                rep.max_ratio = ratio;
            }
            rep
        })
        .reduce(
            || zero.clone(),
            |a, b| TauCalibrationReport {
                probes: a.probes + b.probes,
                admissible: a.admissible + b.admissible,
                min_ratio: a.min_ratio.min(b.min_ratio),
                max_ratio: a.max_ratio.max(b.max_ratio),
            },
        )
}

#[derive(Debug, Clone)]
pub struct SepContinuityReport<T: Real> {
    pub probes: usize,
    pub checked: usize,
    pub max_rel_gap: T,
}

impl<T: Real> SepContinuityReport<T> {
    pub fn passes(&self) -> bool {
        self.checked > 0 && self.max_rel_gap <= T::real(0.10)
    }
}

/// On nearly converged probes the SIRA and JD alphas are close, so the two
/// separations should agree within ten percent.
pub fn run_sep_continuity<T: Real>(probes: usize, seed: u64) -> SepContinuityReport<T> {
    let zero = SepContinuityReport {
        probes: 0,
        checked: 0,
        max_rel_gap: T::zero(),
    };
    (0..probes)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed.wrapping_add(3), i as u64));
            let mut params = probe_params(i);
            params.eta = 1e-7; // nearly converged Ritz vector
            let probe = generate_probe::<T>(&params, &mut rng);
            let mut rep = zero.clone();
            rep.probes = 1;
            // the continuity claim conditions on a converged Ritz pair
            let r = residual_vector(&probe);
            if vecops::norm2(&r) > T::real(1e-6) * probe.a.frobenius_norm() {
                return rep;
            }
            let Ok(oc) = build_oracle(&probe) else {
                return rep;
            };
            let by = oc.b.matvec(&probe.y);
            let alpha_s = (probe.nu - probe.sigma).finv();
            let alpha_j = vecops::dot(&probe.y, &by);
            let (Ok(sep_s), Ok(sep_j)) = (sep(&oc.l_mat, alpha_s), sep(&oc.l_mat, alpha_j))
            else {
                return rep;
            };
            if sep_s <= T::zero() || sep_j <= T::zero() {
                return rep;
            }
            rep.checked = 1;
            rep.max_rel_gap = (sep_s - sep_j).abs() / sep_s.max(sep_j);
            rep
        })
        .reduce(
            || zero.clone(),
            |a, b| SepContinuityReport {
                probes: a.probes + b.probes,
                checked: a.checked + b.checked,
                max_rel_gap: a.max_rel_gap.max(b.max_rel_gap),
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn probe_for_test(seed: u64) -> AnalysisProbe<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        generate_probe(
            &ProbeParams {
                n: 50,
                m: 4,
                eps: 1e-3,
                eta: 0.3,
                upper_scale: 0.3,
            },
            &mut rng,
        )
    }

    #[test]
    fn direction_identity_trivial_cases() {
        let mut probe = probe_for_test(100);
        let ctx = ShiftContext::new(&probe);
        // eps = 0: perturbed and exact directions coincide, both sides zero
        probe.eps = 0.0;
        let res = check_perturbed_direction_identity(&probe, &ctx).unwrap();
        assert!(res <= 1e-14, "residual {res}");
        // f inside the span: f_perp = 0 and the residual vanishes
        probe.eps = 1e-3;
        probe.f = probe.v_basis.col(0).to_vec();
        let res = check_perturbed_direction_identity(&probe, &ctx).unwrap();
        assert!(res <= 1e-13, "residual {res}");
    }

    #[test]
    fn direction_identity_random_probes() {
        for seed in 0..20 {
            let probe = probe_for_test(200 + seed);
            let ctx = ShiftContext::new(&probe);
            let res = check_perturbed_direction_identity(&probe, &ctx).unwrap();
            assert!(res <= 1e-10, "seed {seed}: residual {res}");
        }
    }

    #[test]
    fn expansion_identity_random_probes() {
        for seed in 0..20 {
            let probe = probe_for_test(300 + seed);
            let ctx = ShiftContext::new(&probe);
            let res = check_expansion_identity(&probe, &ctx).unwrap();
            assert!(res <= 1e-12, "seed {seed}: residual {res}");
        }
    }

    #[test]
    fn expansion_identity_x_in_span_gives_zero() {
        let mut probe = probe_for_test(350);
        // overwrite x by something in the span: both sides must vanish
        probe.x = probe.v_basis.col(1).to_vec();
        let ctx = ShiftContext::new(&probe);
        let res = check_expansion_identity(&probe, &ctx).unwrap();
        assert!(res <= 1e-12, "residual {res}");
    }

    #[test]
    fn equivalence_two_by_two_diagonal() {
        // hand-checkable: diagonal A, one-dimensional basis
        let a = DenseMatrix::from_rows_f64(2, 2, &[(2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (5.0, 0.0)]);
        let sigma = cx(1.5, 0.0);
        let v1 = vec![cx(0.8, 0.0), cx(0.6, 0.0)];
        let v_basis = DenseMatrix::from_columns(2, std::slice::from_ref(&v1));
        let h = v_basis.adjoint_mul(&a.matmul(&v_basis));
        let mut ritz = small_eig(&h).unwrap();
        ritz.order_toward(sigma);
        let nu = ritz.values[0];
        let mut y = v_basis.matvec(ritz.vectors.col(0));
        vecops::normalize(&mut y);
        let probe = AnalysisProbe {
            a,
            sigma,
            lambda: cx(2.0, 0.0),
            x: vec![cx(1.0, 0.0), cx(0.0, 0.0)],
            v_basis,
            h,
            ritz,
            nu,
            y,
            f: vec![cx(0.0, 0.0), cx(1.0, 0.0)],
            eps: 1e-3,
        };
        let ctx = ShiftContext::new(&probe);
        let eq = check_equivalence(&probe, &ctx).unwrap();
        assert!(eq.max_collinearity_sine <= 1e-12);
        assert!(eq.gamma_rel_err <= 1e-12);
        assert!(eq.u_s_identity_rel <= 1e-12);
        assert!(eq.y_h_uj <= 1e-13);
    }

    #[test]
    fn equivalence_random_probes() {
        for seed in 0..20 {
            let probe = probe_for_test(400 + seed);
            let ctx = ShiftContext::new(&probe);
            let eq = check_equivalence(&probe, &ctx).unwrap();
            assert!(eq.max_collinearity_sine <= 1e-10, "seed {seed}");
            assert!(eq.gamma_rel_err <= 1e-10, "seed {seed}");
            assert!(eq.u_s_identity_rel <= 1e-10, "seed {seed}");
            assert!(eq.y_h_uj <= 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn tau_bound_holds_on_random_probes() {
        let mut admissible = 0;
        for seed in 0..30 {
            let probe = probe_for_test(500 + seed);
            let ctx = ShiftContext::new(&probe);
            if let TauOutcome::Admissible { ok, .. } = check_tau_bounds(&probe, &ctx) {
                admissible += 1;
                assert!(ok, "seed {seed}: tau bound violated");
            }
        }
        assert!(admissible > 0);
    }

    #[test]
    fn eps_zero_makes_ratio_one() {
        let mut probe = probe_for_test(600);
        probe.eps = 0.0;
        let ctx = ShiftContext::new(&probe);
        match check_tau_bounds(&probe, &ctx) {
            TauOutcome::Admissible { ratio, tau, .. } => {
                assert!(tau <= 1e-14);
                assert!((ratio - 1.0).abs() <= 1e-12);
            }
            TauOutcome::Skipped => panic!("probe unexpectedly skipped"),
        }
    }

    #[test]
    fn sandwich_kappa_one_collapses_to_equality() {
        // A = Q + sigma I with Q unitary: the shifted operator is unitary
        let mut rng = ChaCha8Rng::seed_from_u64(700);
        let n = 30;
        let q = oracle::random_unitary::<f64>(n, &mut rng);
        let sigma = cx(0.7, -0.2);
        let mut a = q.clone();
        for i in 0..n {
            let cur = a.get(i, i);
            a.set(i, i, cur + sigma);
        }
        // basis and Ritz data
        let v1 = oracle::random_unit_vec(n, &mut rng);
        let mut v_basis = DenseMatrix::from_columns(n, &[v1]);
        while v_basis.cols() < 4 {
            let u = oracle::randn_vec(n, &mut rng);
            if let Ok((v, _)) = crate::dense::orthonormalize_against(&v_basis, &u) {
                v_basis.push_col(&v);
            }
        }
        let h = v_basis.adjoint_mul(&a.matmul(&v_basis));
        let mut ritz = small_eig(&h).unwrap();
        ritz.order_toward(sigma);
        let nu = ritz.values[0];
        let mut y = v_basis.matvec(ritz.vectors.col(0));
        vecops::normalize(&mut y);
        let probe = AnalysisProbe {
            a,
            sigma,
            lambda: sigma, // unused here
            x: oracle::random_unit_vec(n, &mut rng),
            v_basis,
            h,
            ritz,
            nu,
            y,
            f: oracle::random_unit_vec(n, &mut rng),
            eps: 1e-4,
        };
        let ctx = ShiftContext::new(&probe);
        let r = residual_vector(&probe);
        let u = ctx.lu.solve(&r);
        let mut u_tilde = u.clone();
        vecops::axpy(
            Complex::new(probe.eps * vecops::norm2(&u), 0.0),
            &probe.f,
            &mut u_tilde,
        );
        let res = vecops::sub(&r, &ctx.shifted.matvec(&u_tilde));
        let relres = vecops::norm2(&res) / vecops::norm2(&r);
        assert!(
            (relres - probe.eps).abs() <= 1e-6 * probe.eps,
            "kappa = 1 should equate error and residual: {relres} vs {}",
            probe.eps
        );
    }

    #[test]
    fn sandwich_random_probes_no_violations() {
        for seed in 0..10 {
            let probe = probe_for_test(800 + seed);
            let ctx = ShiftContext::new(&probe);
            let oc = build_oracle(&probe).unwrap();
            let out = check_residual_sandwich(&probe, &oc, &ctx).unwrap();
            assert!(!out.sira_violation, "seed {seed}");
            assert!(!out.jd_violation, "seed {seed}");
        }
    }

    #[test]
    fn eps_bound_random_probes_no_violations() {
        for seed in 0..10 {
            let probe = probe_for_test(900 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(1900 + seed);
            let oc = build_oracle(&probe).unwrap();
            if let Some(out) = check_eps_bound(&probe, &oc, &mut rng) {
                assert_eq!(out.eps_angle_bound_violations, 0, "seed {seed}");
                assert_eq!(out.eps_sep_bound_violations, 0, "seed {seed}");
                assert_eq!(out.ritz_angle_bound_violations, 0, "seed {seed}");
                assert_eq!(out.expansion_norm_bound_violations, 0, "seed {seed}");
                assert_eq!(out.expansion_cos_bound_violations, 0, "seed {seed}");
                assert_eq!(out.optimal_alpha_violations, 0, "seed {seed}");
            }
        }
    }

    #[test]
    fn calibrated_tau_yields_tight_ratio() {
        let mut found = 0;
        for seed in 0..10 {
            let probe = probe_for_test(1000 + seed);
            let ctx = ShiftContext::new(&probe);
            if let Some((ratio, tau)) = calibrated_tau_ratio(&probe, &ctx, 0.01) {
                found += 1;
                assert!((tau - 0.01).abs() <= 1e-6, "realized tau {tau}");
                assert!((0.99..=1.01).contains(&ratio), "ratio {ratio}");
            }
        }
        assert!(found > 0);
    }
}
