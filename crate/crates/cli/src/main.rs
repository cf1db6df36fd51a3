//! Benchmark driver: runs the eigensolvers against a Matrix Market file and
//! emits machine-readable convergence telemetry, or runs the verification
//! suite for the tolerance theory.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sieig_cli::experiment::{self, ExperimentSpec, RunStatus};

#[derive(Parser)]
#[command(name = "sieig", version, about = "Sparse shift-invert eigensolver benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more solver configurations against a matrix and write
    /// per-iteration histories, a JSON summary and a summary table.
    Solve(SolveArgs),
    /// Run the verification suite for the tolerance theory (identity and
    /// inequality checks against dense oracles).
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SolveArgs {
    /// Flat JSON experiment spec; command-line flags override its fields.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Matrix Market file holding the operator.
    #[arg(long)]
    matrix: Option<std::path::PathBuf>,
    /// Real part of the target.
    #[arg(long)]
    sigma_re: Option<f64>,
    /// Imaginary part of the target.
    #[arg(long)]
    sigma_im: Option<f64>,
    /// Method to run (sira, jd, sira-exact, sia-exact, sia-inexact); repeatable.
    #[arg(long = "method")]
    methods: Vec<String>,
    /// Expansion accuracy (epsilon-tilde) for sira/jd; repeatable.
    #[arg(long = "teps")]
    teps: Vec<f64>,
    /// ILUT drop tolerance for the preconditioner.
    #[arg(long)]
    droptol: Option<f64>,
    /// Maximum outer iterations per cycle.
    #[arg(long)]
    mmax: Option<usize>,
    #[arg(long)]
    max_restarts: Option<usize>,
    /// Output directory for history files, summary.json, timings.json, table.txt.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Seed for the starting vector (omitted: the uniform ones vector).
    #[arg(long)]
    seed: Option<u64>,
    /// Outer-step budget of the relaxed shift-invert Arnoldi tolerance.
    #[arg(long)]
    m_budget: Option<usize>,
    /// GMRES restart length.
    #[arg(long)]
    gmres_restart: Option<usize>,
    /// Cap on operator applications per inner solve.
    #[arg(long)]
    gmres_maxit: Option<usize>,
    /// Outer tolerance factor (tol = max(norm1(A), 1) * factor).
    #[arg(long)]
    outer_tol_factor: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Probes per suite.
    #[arg(long, default_value_t = 500)]
    probes: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn run_solve(args: SolveArgs) -> ExitCode {
    let mut spec = match args.config.as_ref() {
        Some(path) => match ExperimentSpec::from_file(path) {
            Ok(spec) => spec,
            Err(err) => {
                eprintln!("error: cannot read config {}: {err}", path.display());
                return ExitCode::from(2);
            }
        },
        None => ExperimentSpec::default(),
    };

    // flags override file fields
    if let Some(m) = args.matrix {
        spec.matrix = Some(m);
    }
    if let Some(v) = args.sigma_re {
        spec.sigma_re = v;
    }
    if let Some(v) = args.sigma_im {
        spec.sigma_im = v;
    }
    if !args.methods.is_empty() {
        spec.methods = args.methods;
    }
    if !args.teps.is_empty() {
        spec.teps = args.teps;
    }
    if let Some(v) = args.droptol {
        spec.droptol = v;
    }
    if let Some(v) = args.mmax {
        spec.m_max = v;
    }
    if let Some(v) = args.max_restarts {
        spec.max_restarts = v;
    }
    if let Some(v) = args.out {
        spec.out_dir = Some(v);
    }
    if args.seed.is_some() {
        spec.seed = args.seed;
    }
    if args.m_budget.is_some() {
        spec.m_budget = args.m_budget;
    }
    if let Some(v) = args.gmres_restart {
        spec.gmres_restart = v;
    }
    if let Some(v) = args.gmres_maxit {
        spec.gmres_maxit = v;
    }
    if let Some(v) = args.outer_tol_factor {
        spec.outer_tol_factor = v;
    }

    let outcome = match experiment::run_experiment(&spec) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };

    for record in &outcome.records {
        println!(
            "{:<18} status={} lambda={}{:+}i i_out={} i_inn={}",
            record.label,
            record.status,
            record.lambda_re,
            record.lambda_im,
            record.i_out,
            record.i_inn
        );
    }
    println!("reports written to {}", outcome.out_dir.display());

    if outcome
        .records
        .iter()
        .all(|r| matches!(r.status, RunStatus::Converged | RunStatus::Breakdown))
    {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run_verify(args: VerifyArgs) -> ExitCode {
    use std::time::Instant;
    let mut all_ok = true;

    let t = Instant::now();
    let identity = sieig::theory::run_identity_suite::<f64>(args.probes, args.seed);
    let ok = identity.passes();
    all_ok &= ok;
    println!(
        "identity suite     {}  probes={} skipped={} direction={:.2e} expansion={:.2e} telescoped={:.2e} equivalence={:.2e} gamma={:.2e} ({:.1}s)",
        pass_str(ok),
        identity.probes,
        identity.skipped,
        identity.direction_identity_max,
        identity.expansion_max,
        identity.telescoped_max,
        identity.equivalence_max_sine,
        identity.gamma_max_rel,
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    let ineq = sieig::theory::run_inequality_suite::<f64>(args.probes, args.seed);
    let ok = ineq.passes() && ineq.admissible >= args.probes / 2;
    all_ok &= ok;
    println!(
        "inequality suite   {}  probes={} admissible={} violations={} (eps-angle={} eps-sep={} ritz-angle={} norm={} cos={} tau={} sandwich={}) ({:.1}s)",
        pass_str(ok),
        ineq.probes,
        ineq.admissible,
        ineq.violations(),
        ineq.eps_angle_bound_violations,
        ineq.eps_sep_bound_violations,
        ineq.ritz_angle_bound_violations,
        ineq.expansion_norm_bound_violations,
        ineq.expansion_cos_bound_violations,
        ineq.tau_violations,
        ineq.sandwich_violations,
        t.elapsed().as_secs_f64()
    );
    println!(
        "                         tightest bound/value ratios: eps-angle {:.2}, eps-sep {:.2}, ritz-angle {:.2}",
        ineq.min_eps_angle_slack, ineq.min_eps_sep_slack, ineq.min_ritz_angle_slack
    );

    let t = Instant::now();
    let tau = sieig::theory::run_tau_calibration::<f64>(args.probes.min(200), args.seed);
    let ok = tau.passes();
    all_ok &= ok;
    println!(
        "tau calibration    {}  probes={} admissible={} ratio in [{:.6}, {:.6}] ({:.1}s)",
        pass_str(ok),
        tau.probes,
        tau.admissible,
        tau.min_ratio,
        tau.max_ratio,
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    let sep = sieig::theory::run_sep_continuity::<f64>(args.probes.min(100), args.seed);
    let ok = sep.passes();
    all_ok &= ok;
    println!(
        "sep continuity     {}  probes={} checked={} max relative gap {:.4} ({:.1}s)",
        pass_str(ok),
        sep.probes,
        sep.checked,
        sep.max_rel_gap,
        t.elapsed().as_secs_f64()
    );

    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn pass_str(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
