//! End-to-end solver behavior on structured problems: nearest-eigenvalue
//! selection, restart bookkeeping, the exact-solve equivalence of the two
//! expansion routes, and cross-method agreement.

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;

use sieig::dense::{orthonormalize_against, DenseMatrix};
use sieig::eig::small_eig;
use sieig::gmres::Preconditioner;
use sieig::ilut::ilut_factor;
use sieig::matgen;
use sieig::scalar::cx;
use sieig::solver::{
    jd_expand, run_restarted, run_solver, sia_step, sira_expand, Method, OuterConfig, SolveStatus,
};
use sieig::sparse::SparseMatrix;
use sieig::theory::oracle::DenseLu;
use sieig::vecops;
use sieig::C64;

fn random_sparse(n: usize, fill: f64, seed: u64) -> SparseMatrix<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut trips = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                trips.push((
                    i,
                    j,
                    Complex::new(3.0 + rng.gen::<f64>(), rng.gen::<f64>() - 0.5),
                ));
            } else if rng.gen::<f64>() < fill {
                trips.push((
                    i,
                    j,
                    Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                ));
            }
        }
    }
    SparseMatrix::from_triplets(n, trips).unwrap()
}

#[test]
fn diagonal_toy_selects_nearest_eigenvalue_all_methods() {
    let a = matgen::diag_range::<f64>(10);
    for method in [
        Method::Sira,
        Method::Jd,
        Method::SiraExact,
        Method::SiaExact,
        Method::SiaInexact,
    ] {
        let mut cfg = OuterConfig::new(cx(3.2, 0.0), method);
        cfg.inner.droptol = 0.0;
        let (pair, record) = run_solver(&a, &cfg).unwrap();
        assert_eq!(record.status, SolveStatus::Converged, "{method:?}");
        assert!(
            (pair.value - cx(3.0, 0.0)).norm() <= 1e-8,
            "{method:?}: lambda = {}",
            pair.value
        );
        assert!(pair.residual_norm <= record.tol);
        // eigenvector is e_3 up to phase
        let e3 = pair.vector[2].norm();
        assert!(e3 >= 1.0 - 1e-8, "{method:?}: |v_3| = {e3}");
    }
}

#[test]
fn returned_pair_residual_is_consistent() {
    let a = matgen::convection_diffusion::<f64>(20, 1.5);
    let mut cfg = OuterConfig::new(cx(1.0, 0.0), Method::Sira);
    cfg.inner.droptol = 1e-3;
    cfg.m_max = 60;
    let (pair, record) = run_solver(&a, &cfg).unwrap();
    assert_eq!(record.status, SolveStatus::Converged);
    let mut r = a.spmv(&pair.vector);
    vecops::axpy(-pair.value, &pair.vector, &mut r);
    let recomputed = vecops::norm2(&r);
    assert!(
        (recomputed - pair.residual_norm).abs() <= 1e-13 * recomputed.max(1.0),
        "stored {} recomputed {}",
        pair.residual_norm,
        recomputed
    );
}

#[test]
fn methods_agree_on_isolated_eigenvalue() {
    // impurity detaches one eigenvalue; every method must find the same one
    let a = matgen::convection_diffusion_with_impurity::<f64>(20, 1.5, cx(0.5, 0.0));
    let sigma = cx(0.4, 0.0);
    let mut values = Vec::new();
    for method in [
        Method::SiraExact,
        Method::Sira,
        Method::Jd,
        Method::SiaExact,
        Method::SiaInexact,
    ] {
        let mut cfg = OuterConfig::new(sigma, method);
        cfg.inner.droptol = 1e-3;
        cfg.m_max = 40;
        let (pair, record) = run_solver(&a, &cfg).unwrap();
        assert_eq!(record.status, SolveStatus::Converged, "{method:?}");
        values.push(pair.value);
    }
    for v in &values[1..] {
        assert!(
            (v - values[0]).norm() <= 1e-6 * values[0].norm(),
            "methods disagree: {values:?}"
        );
    }
}

#[test]
fn single_cycle_restart_matches_run_solver() {
    let a = matgen::diag_range::<f64>(10);
    let mut cfg = OuterConfig::new(cx(3.2, 0.0), Method::Sira);
    cfg.inner.droptol = 0.0;
    cfg.max_restarts = 5;
    let (pair_restarted, record_restarted) = run_restarted(&a, &cfg).unwrap();
    let (pair_single, record_single) = run_solver(&a, &cfg).unwrap();
    assert_eq!(record_restarted.restarts, 0);
    assert_eq!(record_restarted.i_out(), record_single.i_out());
    assert_eq!(pair_restarted.value, pair_single.value);
}

#[test]
fn forced_restarts_keep_cycle_best_monotone() {
    // m_max = 2 exercises the bookkeeping: cycle-best residuals must never
    // grow and each new cycle must start from the previous best candidate
    // (the run may legitimately stall at this subspace size)
    let a = matgen::diag_range::<f64>(10);
    let mut cfg = OuterConfig::new(cx(3.2, 0.0), Method::Sira);
    cfg.inner.droptol = 0.0;
    cfg.m_max = 2;
    cfg.max_restarts = 20;
    let (_pair, record) = run_restarted(&a, &cfg).unwrap();
    assert!(record.restarts >= 1, "expected multiple cycles");

    // group per cycle, check the best residual never increases
    let mut cycle_best: Vec<f64> = Vec::new();
    for row in &record.iterations {
        if row.cycle == cycle_best.len() {
            cycle_best.push(row.residual_norm);
        } else {
            let last = cycle_best.last_mut().unwrap();
            *last = last.min(row.residual_norm);
        }
    }
    let slack = 1e-12 * a.one_norm();
    for w in cycle_best.windows(2) {
        assert!(w[1] <= w[0] + slack, "cycle best grew: {cycle_best:?}");
    }

    // restart vector bookkeeping: the first iteration of each new cycle
    // reproduces the previous cycle's best residual
    let mut prev_best = f64::INFINITY;
    let mut prev_cycle = 0usize;
    for row in &record.iterations {
        if row.cycle != prev_cycle {
            assert!(
                (row.residual_norm - prev_best).abs() <= slack.max(1e-10 * prev_best),
                "cycle {} started at {} but previous best was {}",
                row.cycle,
                row.residual_norm,
                prev_best
            );
            prev_cycle = row.cycle;
            prev_best = row.residual_norm;
        } else {
            prev_best = prev_best.min(row.residual_norm);
        }
    }
}

#[test]
fn restarted_toy_converges_with_small_cycles() {
    let a = matgen::diag_range::<f64>(10);
    let mut cfg = OuterConfig::new(cx(3.2, 0.0), Method::Sira);
    cfg.inner.droptol = 0.0;
    cfg.m_max = 3;
    cfg.max_restarts = 30;
    let (pair, record) = run_restarted(&a, &cfg).unwrap();
    assert_eq!(record.status, SolveStatus::Converged);
    assert!(record.restarts >= 1);
    assert!((pair.value - cx(3.0, 0.0)).norm() <= 1e-8);
}

#[test]
fn not_converged_reports_best_candidate() {
    let a = matgen::convection_diffusion::<f64>(20, 1.5);
    let mut cfg = OuterConfig::new(cx(1.0, 0.0), Method::Sira);
    cfg.inner.droptol = 1e-3;
    cfg.m_max = 2;
    cfg.max_restarts = 0;
    let (pair, record) = run_solver(&a, &cfg).unwrap();
    assert_eq!(record.status, SolveStatus::NotConverged);
    assert_eq!(record.i_out(), 2);
    assert!(pair.residual_norm > record.tol);
    assert!(pair.residual_norm.is_finite());
}

#[test]
fn exact_solve_expansions_coincide_and_match_dense_oracle() {
    // with inner systems solved essentially exactly, the SIRA and JD
    // expansion vectors are the same direction: (I - P_V) B y
    for (n, m, seed) in [(60usize, 4usize, 1u64), (100, 8, 2)] {
        let a = random_sparse(n, 0.15, seed);
        let sigma = cx(0.3, 0.1);
        let factors = ilut_factor(&a, sigma, 0.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 100);

        // orthonormal basis and its Ritz data
        let mut v_basis = DenseMatrix::zeros(n, 0);
        while v_basis.cols() < m {
            let u: Vec<C64> = (0..n)
                .map(|_| Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            if let Ok((v, _)) = orthonormalize_against(&v_basis, &u) {
                v_basis.push_col(&v);
            }
        }
        let av = a.to_dense().matmul(&v_basis);
        let h = v_basis.adjoint_mul(&av);
        let mut ritz = small_eig(&h).unwrap();
        ritz.order_toward(sigma);
        let nu = ritz.values[0];
        let mut y = v_basis.matvec(ritz.vectors.col(0));
        vecops::normalize(&mut y);
        let mut r = a.spmv(&y);
        vecops::axpy(-nu, &y, &mut r);

        let eps = 1e-14;
        let s = sira_expand(&a, sigma, &v_basis, &r, &factors, eps, 30, 600);
        assert!(s.report.converged);
        let proj =
            sieig::ilut::ProjectedPreconditioner::new(&factors, &y).unwrap();
        let j = jd_expand(&a, sigma, &v_basis, &y, &r, &proj, eps, 30, 600);
        assert!(j.report.converged);
        let v_s = s.v_new.expect("no breakdown");
        let v_j = j.v_new.expect("no breakdown");
        let sine = vecops::vector_sine(&v_s, &v_j);
        assert!(sine <= 1e-8, "n={n}: expansion directions differ, sine {sine}");

        // dense oracle: v_S is parallel to (I - P_V)(A - sigma I)^{-1} r
        let mut shifted = a.to_dense();
        shifted.shift_diag(sigma);
        let lu = DenseLu::factor(&shifted).unwrap();
        let u_oracle = lu.solve(&r);
        let mut w = u_oracle;
        for pass in 0..2 {
            let _ = pass;
            for c in 0..v_basis.cols() {
                let coeff = vecops::dot(v_basis.col(c), &w);
                vecops::axpy(-coeff, v_basis.col(c), &mut w);
            }
        }
        let sine_oracle = vecops::vector_sine(&v_s, &w);
        assert!(sine_oracle <= 1e-8, "oracle direction differs: {sine_oracle}");
    }
}

#[test]
fn modest_tolerance_expansion_respects_contract() {
    let a = random_sparse(50, 0.2, 9);
    let sigma = cx(0.2, 0.0);
    let factors = ilut_factor(&a, sigma, 1e-2).unwrap();
    let v1: Vec<C64> = {
        let mut v = vec![cx(1.0, 0.0); 50];
        vecops::normalize(&mut v);
        v
    };
    let v_basis = DenseMatrix::from_columns(50, std::slice::from_ref(&v1));
    let mut r = a.spmv(&v1);
    let nu = vecops::dot(&v1, &r);
    vecops::axpy(-nu, &v1, &mut r);
    let exp = sira_expand(&a, sigma, &v_basis, &r, &factors, 0.1, 30, 300);
    assert!(exp.report.converged);
    assert!(exp.report.relres <= 0.1);
}

#[test]
fn sia_krylov_space_matches_dense_oracle() {
    // diagonal A: the shift-invert Krylov space has a closed form
    let a = matgen::diag_range::<f64>(12);
    let sigma = cx(3.7, 0.0);
    let factors = ilut_factor(&a, sigma, 0.0).unwrap();
    let n = 12;
    let mut v1 = vec![cx(1.0, 0.0); n];
    vecops::normalize(&mut v1);
    let mut v_basis = DenseMatrix::from_columns(n, std::slice::from_ref(&v1));
    for _ in 0..4 {
        let step = sia_step(&a, sigma, &v_basis, &factors, 1e-14, 30, 300);
        assert!(step.report.converged);
        v_basis.push_col(step.v_new.as_ref().unwrap());
    }
    // dense-oracle Krylov basis of B = (A - sigma I)^{-1}
    let binv: Vec<C64> = (1..=n)
        .map(|i| (cx::<f64>(i as f64, 0.0) - sigma).finv())
        .collect();
    let mut oracle_basis = DenseMatrix::zeros(n, 0);
    let mut cur = v1;
    for _ in 0..5 {
        if let Ok((q, _)) = orthonormalize_against(&oracle_basis, &cur) {
            oracle_basis.push_col(&q);
        }
        cur = cur
            .iter()
            .zip(binv.iter())
            .map(|(v, b)| v * b)
            .collect();
    }
    // principal angles: every oracle direction lies in the computed space
    for jcol in 0..oracle_basis.cols() {
        let s = sieig::dense::subspace_sine(&v_basis, oracle_basis.col(jcol)).unwrap();
        assert!(s <= 1e-10, "column {jcol}: sine {s}");
    }
}

#[test]
fn sia_inner_report_respects_tolerance() {
    let a = matgen::convection_diffusion::<f64>(10, 1.0);
    let sigma = cx(0.5, 0.0);
    let factors = ilut_factor(&a, sigma, 0.0).unwrap();
    let mut v1: Vec<C64> = vec![cx(1.0, 0.0); 100];
    vecops::normalize(&mut v1);
    let v_basis = DenseMatrix::from_columns(100, &[v1]);
    for tol in [1e-2, 1e-6, 1e-12] {
        let step = sia_step(&a, sigma, &v_basis, &factors, tol, 30, 300);
        assert!(step.report.converged);
        assert!(step.report.relres <= tol);
    }
}

#[test]
fn identity_preconditioner_also_works() {
    // the solver contract does not depend on ILUT quality; identity-like
    // preconditioning still converges on an easy problem
    struct NoOp;
    impl Preconditioner<f64> for NoOp {
        fn apply_inv(&self, w: &[C64]) -> Vec<C64> {
            w.to_vec()
        }
    }
    let a = matgen::diag_range::<f64>(10);
    let sigma = cx(3.2, 0.0);
    let v1: Vec<C64> = {
        let mut v = vec![cx(1.0, 0.0); 10];
        vecops::normalize(&mut v);
        v
    };
    let v_basis = DenseMatrix::from_columns(10, std::slice::from_ref(&v1));
    let mut r = a.spmv(&v1);
    let nu = vecops::dot(&v1, &r);
    vecops::axpy(-nu, &v1, &mut r);
    let exp = sira_expand(&a, sigma, &v_basis, &r, &NoOp, 1e-10, 30, 300);
    assert!(exp.report.converged);
}

#[test]
fn cap_accounting_matches_flags() {
    // a loose teps makes the 0.1 cap bind on most steps
    let a = matgen::convection_diffusion_with_impurity::<f64>(12, 1.5, cx(0.5, 0.0));
    let mut cfg = OuterConfig::new(cx(0.4, 0.0), Method::Sira);
    cfg.teps = 0.4;
    cfg.inner.droptol = 1e-3;
    cfg.m_max = 40;
    let (_pair, record) = run_solver(&a, &cfg).unwrap();
    assert_eq!(record.status, SolveStatus::Converged);
    let capped_rows = record
        .iterations
        .iter()
        .filter(|r| r.eps_capped)
        .count();
    assert!(capped_rows > 0, "expected the cap to bind at least once");
    assert_eq!(record.i_cap(), capped_rows);
    for row in &record.iterations {
        if row.eps_capped {
            assert_eq!(row.inner_tol, 0.1);
        }
    }
}

#[test]
fn invariant_subspace_breakdown_is_flagged() {
    // unreachable tolerance on a tiny problem: the basis saturates the
    // whole space and the expansion must signal the invariant subspace
    let a = matgen::diag_range::<f64>(4);
    for method in [Method::Sira, Method::SiaExact] {
        let mut cfg = OuterConfig::new(cx(2.3, 0.0), method);
        cfg.inner.droptol = 0.0;
        cfg.outer_tol_factor = 1e-30;
        cfg.m_max = 10;
        let (pair, record) = run_solver(&a, &cfg).unwrap();
        assert_eq!(
            record.status,
            SolveStatus::ConvergedByBreakdown,
            "{method:?}"
        );
        assert!(
            (pair.value - cx(2.0, 0.0)).norm() <= 1e-8,
            "{method:?}: lambda {}",
            pair.value
        );
        assert!(record.i_out() <= 6, "{method:?}: {}", record.i_out());
    }
}

#[test]
fn complex_target_finds_complex_eigenvalue() {
    // complex impurity detaches a complex eigenvalue; a complex target
    // exercises the full arithmetic path of every method
    let a = matgen::convection_diffusion_with_impurity::<f64>(16, 1.5, cx(0.4, 0.3));
    let sigma = cx(0.35, 0.25);
    let mut values = Vec::new();
    for method in [Method::SiraExact, Method::Sira, Method::Jd, Method::SiaInexact] {
        let mut cfg = OuterConfig::new(sigma, method);
        cfg.inner.droptol = 1e-3;
        cfg.m_max = 40;
        let (pair, record) = run_solver(&a, &cfg).unwrap();
        assert_eq!(record.status, SolveStatus::Converged, "{method:?}");
        assert!(pair.value.im > 0.1, "{method:?}: expected a complex eigenvalue");
        values.push(pair.value);
    }
    for v in &values[1..] {
        assert!((v - values[0]).norm() <= 1e-6 * values[0].norm());
    }
}

#[test]
fn restarted_methods_converge_with_small_cycles() {
    let a = matgen::convection_diffusion_with_impurity::<f64>(20, 1.5, cx(0.5, 0.0));
    for method in [Method::Sira, Method::Jd, Method::SiaInexact] {
        let mut cfg = OuterConfig::new(cx(0.4, 0.0), method);
        cfg.inner.droptol = 1e-3;
        cfg.m_max = 8;
        cfg.max_restarts = 10;
        let (pair, record) = run_restarted(&a, &cfg).unwrap();
        assert_eq!(record.status, SolveStatus::Converged, "{method:?}");
        assert!(record.restarts >= 1, "{method:?} should need a restart");
        assert!(
            (pair.value - cx(0.23991269, 0.0)).norm() <= 1e-6,
            "{method:?}: lambda {}",
            pair.value
        );
    }
}

#[test]
fn timing_buckets_are_populated() {
    let a = matgen::convection_diffusion_with_impurity::<f64>(16, 1.5, cx(0.5, 0.0));
    let mut cfg = OuterConfig::new(cx(0.4, 0.0), Method::Jd);
    cfg.inner.droptol = 1e-3;
    cfg.m_max = 40;
    let (_pair, record) = run_solver(&a, &cfg).unwrap();
    assert_eq!(record.status, SolveStatus::Converged);
    // eigensolves, orthonormalization, preconditioner setup and Krylov time
    // all happened, so every bucket must have accumulated something
    assert!(record.t1 > 0.0);
    assert!(record.t2 > 0.0);
    assert!(record.t3 > 0.0);
    assert!(record.t4 > 0.0);
    let row_totals: f64 = record
        .iterations
        .iter()
        .map(|r| r.t1 + r.t2 + r.t3 + r.t4)
        .sum();
    // per-row buckets sum to the run totals, modulo the initial factorization
    assert!(record.t1 + record.t2 + record.t3 + record.t4 >= row_totals);
}
