//! Experiment execution: expands a spec into (method, teps) runs, drives the
//! solvers and writes per-iteration CSV histories, a JSON summary, a
//! timings file and a plain-text table.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sieig::mm::mm_load;
use sieig::scalar::cx;
use sieig::solver::{
    run_restarted, ConvergenceRecord, EigenPair, Method, OuterConfig, SolveStatus, StartVector,
};
use sieig::sparse::SparseMatrix;

/// Flat experiment description, readable from a JSON file; command-line
/// flags override individual fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub matrix: Option<PathBuf>,
    pub sigma_re: f64,
    pub sigma_im: f64,
    pub methods: Vec<String>,
    pub teps: Vec<f64>,
    pub droptol: f64,
    pub m_max: usize,
    pub max_restarts: usize,
    pub m_budget: Option<usize>,
    pub gmres_restart: usize,
    pub gmres_maxit: usize,
    pub outer_tol_factor: f64,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            matrix: None,
            sigma_re: 0.0,
            sigma_im: 0.0,
            methods: vec!["sira".into()],
            teps: vec![1e-3],
            droptol: 1e-3,
            m_max: 30,
            max_restarts: 0,
            m_budget: None,
            gmres_restart: 30,
            gmres_maxit: 300,
            outer_tol_factor: 1e-10,
            seed: None,
            out_dir: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug)]
pub enum ExperimentError {
    Io(std::io::Error),
    Json(serde_json::Error),
    Matrix(sieig::mm::MmError),
    Spec(String),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Io(e) => write!(f, "i/o error: {e}"),
            ExperimentError::Json(e) => write!(f, "invalid JSON config: {e}"),
            ExperimentError::Matrix(e) => write!(f, "matrix load failed: {e}"),
            ExperimentError::Spec(msg) => write!(f, "invalid experiment spec: {msg}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e)
    }
}

impl From<serde_json::Error> for ExperimentError {
    fn from(e: serde_json::Error) -> Self {
        ExperimentError::Json(e)
    }
}

impl From<sieig::mm::MmError> for ExperimentError {
    fn from(e: sieig::mm::MmError) -> Self {
        ExperimentError::Matrix(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Converged,
    Breakdown,
    NotConverged,
    Error,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RunStatus::Converged => "converged",
            RunStatus::Breakdown => "breakdown",
            RunStatus::NotConverged => "not-converged",
            RunStatus::Error => "error",
        };
        f.write_str(s)
    }
}

/// One completed (method, teps) run; everything here is deterministic for
/// a fixed spec and seed. Wall-clock timings live in a separate structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub method: String,
    pub teps: Option<f64>,
    pub status: RunStatus,
    pub error: Option<String>,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub residual_norm: f64,
    pub tol: f64,
    pub i_out: usize,
    pub i_inn: usize,
    pub i_cap01: usize,
    pub restarts: usize,
    pub history_file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTimings {
    pub label: String,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub out_dir: PathBuf,
}

fn run_label(method: Method, teps: Option<f64>) -> String {
    match (method, teps) {
        (Method::Sira, Some(t)) => format!("SIRA({t:.0e})"),
        (Method::Jd, Some(t)) => format!("JD({t:.0e})"),
        (Method::SiraExact, _) => "Exact SIRA".to_string(),
        (Method::SiaExact, _) => "Exact SIA".to_string(),
        (Method::SiaInexact, _) => "Inexact SIA".to_string(),
        (m, None) => m.as_str().to_string(),
    }
}

fn history_file_name(method: Method, teps: Option<f64>) -> String {
    match teps {
        Some(t) => format!("history_{}_{t:.0e}.csv", method.as_str()),
        None => format!("history_{}.csv", method.as_str()),
    }
}

/// Expands the spec into runs: adaptive methods pair with every teps value,
/// exact/relaxed methods run once.
fn expand_runs(spec: &ExperimentSpec) -> Result<Vec<(Method, Option<f64>)>, ExperimentError> {
    if spec.methods.is_empty() {
        return Err(ExperimentError::Spec("no methods given".into()));
    }
    if spec.droptol < 0.0 {
        return Err(ExperimentError::Spec("droptol must be nonnegative".into()));
    }
    let mut runs = Vec::new();
    for name in &spec.methods {
        let method: Method = name
            .parse()
            .map_err(ExperimentError::Spec)?;
        match method {
            Method::Sira | Method::Jd => {
                if spec.teps.is_empty() {
                    return Err(ExperimentError::Spec(
                        "sira/jd require at least one teps value".into(),
                    ));
                }
                for &t in &spec.teps {
                    runs.push((method, Some(t)));
                }
            }
            _ => runs.push((method, None)),
        }
    }
    Ok(runs)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome, ExperimentError> {
    let matrix_path = spec
        .matrix
        .as_ref()
        .ok_or_else(|| ExperimentError::Spec("no matrix file given".into()))?;
    let out_dir = spec
        .out_dir
        .clone()
        .ok_or_else(|| ExperimentError::Spec("no output directory given".into()))?;
    let runs = expand_runs(spec)?;

    let a: SparseMatrix<f64> = mm_load(matrix_path)?;
    let a_norm = a.one_norm().max(1.0);
    fs::create_dir_all(&out_dir)?;

    let mut records = Vec::new();
    let mut timings = Vec::new();
    for (method, teps) in runs {
        let mut cfg = OuterConfig::new(cx(spec.sigma_re, spec.sigma_im), method);
        if let Some(t) = teps {
            cfg.teps = t;
        }
        cfg.outer_tol_factor = spec.outer_tol_factor;
        cfg.m_max = spec.m_max;
        cfg.max_restarts = spec.max_restarts;
        cfg.inner.droptol = spec.droptol;
        cfg.inner.restart = spec.gmres_restart;
        cfg.inner.maxit = spec.gmres_maxit;
        cfg.inner.m_budget = spec.m_budget;
        if let Some(seed) = spec.seed {
            cfg.start = StartVector::Seeded(seed);
        }

        let label = run_label(method, teps);
        let history_file = history_file_name(method, teps);
        match run_restarted(&a, &cfg) {
            Ok((pair, record)) => {
                write_history(&out_dir.join(&history_file), &record, a_norm)?;
                records.push(build_record(
                    &label,
                    method,
                    teps,
                    &pair,
                    &record,
                    &history_file,
                ));
                timings.push(RunTimings {
                    label: label.clone(),
                    t1: record.t1,
                    t2: record.t2,
                    t3: record.t3,
                    t4: record.t4,
                });
            }
            Err(err) => {
                // record the failure, keep running the remaining configs
                records.push(RunRecord {
                    label: label.clone(),
                    method: method.as_str().to_string(),
                    teps,
                    status: RunStatus::Error,
                    error: Some(err.to_string()),
                    lambda_re: f64::NAN,
                    lambda_im: f64::NAN,
                    residual_norm: f64::NAN,
                    tol: f64::NAN,
                    i_out: 0,
                    i_inn: 0,
                    i_cap01: 0,
                    restarts: 0,
                    history_file: String::new(),
                });
            }
        }
    }

    emit_report(&out_dir, &records, &timings)?;
    Ok(ExperimentOutcome { records, out_dir })
}

fn build_record(
    label: &str,
    method: Method,
    teps: Option<f64>,
    pair: &EigenPair<f64>,
    record: &ConvergenceRecord<f64>,
    history_file: &str,
) -> RunRecord {
    let status = match record.status {
        SolveStatus::Converged => RunStatus::Converged,
        SolveStatus::ConvergedByBreakdown => RunStatus::Breakdown,
        SolveStatus::NotConverged => RunStatus::NotConverged,
    };
    RunRecord {
        label: label.to_string(),
        method: method.as_str().to_string(),
        teps,
        status,
        error: None,
        lambda_re: pair.value.re,
        lambda_im: pair.value.im,
        residual_norm: pair.residual_norm,
        tol: record.tol,
        i_out: record.i_out(),
        i_inn: record.i_inn(),
        i_cap01: record.i_cap(),
        restarts: record.restarts,
        history_file: history_file.to_string(),
    }
}

/// Per-iteration history: the two curves of interest are the relative outer
/// residual and the inner iteration count per outer iteration.
fn write_history(
    path: &Path,
    record: &ConvergenceRecord<f64>,
    a_norm: f64,
) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_to_io)?;
    w.write_record(["outer_index", "relative_residual", "inner_tol", "inner_iters"])
        .map_err(csv_to_io)?;
    for row in &record.iterations {
        w.write_record([
            row.outer_index.to_string(),
            (row.residual_norm / a_norm).to_string(),
            row.inner_tol.to_string(),
            row.inner_iterations.to_string(),
        ])
        .map_err(csv_to_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_to_io(e: csv::Error) -> ExperimentError {
    ExperimentError::Io(std::io::Error::other(e))
}

/// Writes summary.json (deterministic), timings.json (wall-clock buckets)
/// and table.txt (a table shaped like the benchmark write-ups).
pub fn emit_report(
    out_dir: &Path,
    records: &[RunRecord],
    timings: &[RunTimings],
) -> Result<(), ExperimentError> {
    let summary = serde_json::to_string_pretty(records)?;
    fs::write(out_dir.join("summary.json"), summary)?;
    let timing_json = serde_json::to_string_pretty(timings)?;
    fs::write(out_dir.join("timings.json"), timing_json)?;

    let mut table = String::new();
    table.push_str(&format!(
        "{:<16} {:>8} {:>7} {:>7} {:>9} {:>9} {:>9} {:>9}  {}\n",
        "Algorithm", "I_inn", "I_out", "I_0.1", "T1", "T2", "T3", "T4", "lambda"
    ));
    for r in records {
        let t = timings.iter().find(|t| t.label == r.label);
        let cap = match r.method.as_str() {
            "sia-exact" | "sia-inexact" | "sira-exact" => "-".to_string(),
            _ => r.i_cap01.to_string(),
        };
        let (t1, t2, t3, t4) = t.map_or((0.0, 0.0, 0.0, 0.0), |t| (t.t1, t.t2, t.t3, t.t4));
        table.push_str(&format!(
            "{:<16} {:>8} {:>7} {:>7} {:>9.4} {:>9.4} {:>9.4} {:>9.4}  {}{:+}i ({})\n",
            r.label, r.i_inn, r.i_out, cap, t1, t2, t3, t4, r.lambda_re, r.lambda_im, r.status
        ));
    }
    let mut f = fs::File::create(out_dir.join("table.txt"))?;
    f.write_all(table.as_bytes())?;
    Ok(())
}
