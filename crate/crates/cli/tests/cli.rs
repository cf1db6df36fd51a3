//! Driver-level tests: spec expansion, file outputs, determinism and exit
//! codes of the `sieig` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sieig_cli::experiment::{run_experiment, ExperimentSpec, RunStatus};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sieig"))
}

fn write_diag_mtx(dir: &Path, name: &str, diag: &[f64]) -> PathBuf {
    let n = diag.len();
    let mut text = String::from("%%MatrixMarket matrix coordinate real general\n");
    text.push_str(&format!("{n} {n} {n}\n"));
    for (i, v) in diag.iter().enumerate() {
        text.push_str(&format!("{} {} {v}\n", i + 1, i + 1));
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn diag_spec(dir: &Path) -> ExperimentSpec {
    let matrix = write_diag_mtx(dir, "diag.mtx", &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
    ExperimentSpec {
        matrix: Some(matrix),
        sigma_re: 3.2,
        sigma_im: 0.0,
        methods: vec!["sira".into()],
        teps: vec![1e-3],
        droptol: 0.0,
        out_dir: Some(dir.join("out")),
        ..ExperimentSpec::default()
    }
}

#[test]
fn diagonal_spec_converges_to_nearest_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = diag_spec(tmp.path());
    let outcome = run_experiment(&spec).unwrap();
    assert_eq!(outcome.records.len(), 1);
    let r = &outcome.records[0];
    assert_eq!(r.status, RunStatus::Converged);
    assert!((r.lambda_re - 3.0).abs() <= 1e-8);
    assert!(r.lambda_im.abs() <= 1e-8);
    assert!(outcome.out_dir.join("summary.json").exists());
    assert!(outcome.out_dir.join("timings.json").exists());
    assert!(outcome.out_dir.join("table.txt").exists());
    assert!(outcome.out_dir.join(&r.history_file).exists());
}

#[test]
fn summary_i_inn_equals_history_column_sum() {
    let tmp = tempfile::tempdir().unwrap();
    let mut spec = diag_spec(tmp.path());
    spec.methods = vec!["sira".into(), "jd".into()];
    let outcome = run_experiment(&spec).unwrap();
    assert_eq!(outcome.records.len(), 2);
    for r in &outcome.records {
        let mut rdr = csv::Reader::from_path(outcome.out_dir.join(&r.history_file)).unwrap();
        let mut inner_sum = 0usize;
        let mut rows = 0usize;
        for rec in rdr.records() {
            let rec = rec.unwrap();
            inner_sum += rec[3].parse::<usize>().unwrap();
            rows += 1;
        }
        assert_eq!(inner_sum, r.i_inn, "{}", r.label);
        assert_eq!(rows, r.i_out, "{}", r.label);
    }
}

#[test]
fn history_round_trips_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = diag_spec(tmp.path());
    let outcome = run_experiment(&spec).unwrap();
    let r = &outcome.records[0];
    // re-parse the CSV: float fields must round-trip bit-exactly
    let text = fs::read_to_string(outcome.out_dir.join(&r.history_file)).unwrap();
    let reparsed: Vec<(usize, f64, f64, usize)> = text
        .lines()
        .skip(1)
        .map(|line| {
            let mut it = line.split(',');
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    let mut rewritten = String::from("outer_index,relative_residual,inner_tol,inner_iters\n");
    for (a, b, c, d) in &reparsed {
        rewritten.push_str(&format!("{a},{b},{c},{d}\n"));
    }
    assert_eq!(text, rewritten);
}

#[test]
fn identical_spec_and_seed_give_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut spec = diag_spec(tmp.path());
    spec.seed = Some(99);
    spec.out_dir = Some(tmp.path().join("a"));
    let out_a = run_experiment(&spec).unwrap();
    spec.out_dir = Some(tmp.path().join("b"));
    let out_b = run_experiment(&spec).unwrap();
    let files = ["summary.json", &out_a.records[0].history_file];
    for f in files {
        let a = fs::read(out_a.out_dir.join(f)).unwrap();
        let b = fs::read(out_b.out_dir.join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
}

#[test]
fn immediate_convergence_writes_single_row() {
    let tmp = tempfile::tempdir().unwrap();
    let matrix = write_diag_mtx(tmp.path(), "eye.mtx", &[1.0; 6]);
    let spec = ExperimentSpec {
        matrix: Some(matrix),
        sigma_re: 1.1,
        methods: vec!["sira".into()],
        droptol: 0.0,
        out_dir: Some(tmp.path().join("out")),
        ..ExperimentSpec::default()
    };
    let outcome = run_experiment(&spec).unwrap();
    let r = &outcome.records[0];
    assert_eq!(r.status, RunStatus::Converged);
    assert_eq!(r.i_out, 1);
    let text = fs::read_to_string(outcome.out_dir.join(&r.history_file)).unwrap();
    assert_eq!(text.lines().count(), 2); // header plus one row
}

#[test]
fn binary_solve_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let matrix = write_diag_mtx(tmp.path(), "diag.mtx", &[1.0, 2.0, 3.0, 4.0, 5.0]);
    // success
    let out = bin()
        .args([
            "solve",
            "--matrix",
            matrix.to_str().unwrap(),
            "--sigma-re",
            "3.2",
            "--sigma-im",
            "0",
            "--method",
            "sira",
            "--teps",
            "1e-3",
            "--droptol",
            "0",
            "--mmax",
            "20",
            "--max-restarts",
            "0",
            "--out",
            tmp.path().join("ok").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // configuration error: missing matrix
    let out = bin().args(["solve", "--sigma-re", "1.0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // unknown method is a configuration error
    let out = bin()
        .args([
            "solve",
            "--matrix",
            matrix.to_str().unwrap(),
            "--method",
            "qr-power",
            "--out",
            tmp.path().join("bad").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // non-convergence surfaces as exit code 1
    let harder = write_diag_mtx(
        tmp.path(),
        "harder.mtx",
        &(1..=40).map(|i| i as f64).collect::<Vec<_>>(),
    );
    let out = bin()
        .args([
            "solve",
            "--matrix",
            harder.to_str().unwrap(),
            "--sigma-re",
            "20.7",
            "--method",
            "sira",
            "--teps",
            "1e-3",
            "--droptol",
            "0",
            "--mmax",
            "2",
            "--max-restarts",
            "0",
            "--out",
            tmp.path().join("nc").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let matrix = write_diag_mtx(tmp.path(), "diag.mtx", &[1.0, 2.0, 3.0, 4.0, 5.0]);
    let config = tmp.path().join("exp.json");
    fs::write(
        &config,
        format!(
            r#"{{
  "matrix": "{}",
  "sigma_re": 3.2,
  "methods": ["sira", "jd"],
  "teps": [1e-3],
  "droptol": 0.0,
  "m_max": 20,
  "out_dir": "{}"
}}"#,
            matrix.display(),
            tmp.path().join("from_config").display()
        ),
    )
    .unwrap();
    // flag overrides the config's method list
    let out = bin()
        .args([
            "solve",
            "--config",
            config.to_str().unwrap(),
            "--method",
            "sia-inexact",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary =
        fs::read_to_string(tmp.path().join("from_config").join("summary.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    let arr = parsed.as_array().unwrap();
    assert_eq!(arr.len(), 1);
    assert_eq!(arr[0]["method"], "sia-inexact");
}

#[test]
fn two_method_run_gives_summary_array_of_two() {
    let tmp = tempfile::tempdir().unwrap();
    let mut spec = diag_spec(tmp.path());
    spec.methods = vec!["sira".into(), "sia-inexact".into()];
    let outcome = run_experiment(&spec).unwrap();
    let text = fs::read_to_string(outcome.out_dir.join("summary.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 2);
}

#[test]
fn verify_subcommand_smoke() {
    let out = bin()
        .args(["verify", "--probes", "24", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("identity suite"));
    assert!(stdout.contains("PASS"));
}

#[test]
fn failed_run_is_recorded_and_experiment_continues() {
    // zero diagonal with sigma = 0 hits an exact zero pivot in the ILUT;
    // the run is recorded as an error and the next one still executes
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("%%MatrixMarket matrix coordinate real general\n3 3 4\n");
    text.push_str("1 2 1.0\n2 1 1.0\n2 2 1.0\n3 3 2.0\n");
    let matrix = tmp.path().join("zerodiag.mtx");
    fs::write(&matrix, text).unwrap();
    let spec = ExperimentSpec {
        matrix: Some(matrix),
        sigma_re: 0.0,
        methods: vec!["sira".into(), "sia-inexact".into()],
        droptol: 0.0,
        out_dir: Some(tmp.path().join("out")),
        ..ExperimentSpec::default()
    };
    let outcome = run_experiment(&spec).unwrap();
    assert_eq!(outcome.records.len(), 2);
    assert_eq!(outcome.records[0].status, RunStatus::Error);
    assert!(outcome.records[0].error.as_deref().unwrap().contains("pivot"));
    assert_eq!(outcome.records[1].status, RunStatus::Error);
    // summary still written with both rows
    let text = fs::read_to_string(outcome.out_dir.join("summary.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 2);
}

#[test]
fn complex_matrix_and_target_through_the_binary() {
    let tmp = tempfile::tempdir().unwrap();
    // diagonal complex matrix: eigenvalues on the diagonal
    let mut text = String::from("%%MatrixMarket matrix coordinate complex general\n4 4 4\n");
    text.push_str("1 1 1.0 1.0\n2 2 2.0 -1.0\n3 3 3.0 0.5\n4 4 -1.0 2.0\n");
    let matrix = tmp.path().join("cdiag.mtx");
    fs::write(&matrix, text).unwrap();
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args([
            "solve",
            "--matrix",
            matrix.to_str().unwrap(),
            "--sigma-re",
            "2.1",
            "--sigma-im",
            "-0.8",
            "--method",
            "jd",
            "--teps",
            "1e-3",
            "--droptol",
            "0",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(out_dir.join("summary.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    let rec = &parsed.as_array().unwrap()[0];
    assert!((rec["lambda_re"].as_f64().unwrap() - 2.0).abs() <= 1e-8);
    assert!((rec["lambda_im"].as_f64().unwrap() + 1.0).abs() <= 1e-8);
}
