//! End-to-end runs of the `orthnmf` binary: flag handling, output files,
//! exit codes, and run-to-run determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orthnmf"))
}

fn write(path: &Path, contents: &str) {
    fs::write(path, contents).unwrap();
}

/// 6x8 nonnegative test matrix in coordinate layout (two noisy blocks).
fn sample_matrix(dir: &Path) -> std::path::PathBuf {
    let mut body = String::from("%%MatrixMarket matrix coordinate real general\n6 8 48\n");
    let mut seed = 88172645463325252u64;
    let mut next = || {
        // xorshift64; plenty for test data
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    for i in 1..=6 {
        for j in 1..=8 {
            let block = ((i <= 3) == (j <= 4)) as u8 as f64;
            body.push_str(&format!("{i} {j} {:.6}\n", 0.05 + block + next()));
        }
    }
    let path = dir.join("a.mtx");
    write(&path, &body);
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn factorize_writes_trace_factors_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let out_dir = dir.path().join("run");
    let out = run(&[
        "factorize",
        "--input",
        input.to_str().unwrap(),
        "--solver",
        "ls",
        "--rank",
        "2",
        "--seed",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines.len(), 22, "header + error0 + 20 iterations");
    assert_eq!(lines[0], "iter,objective,inner_iters,violation");
    assert!(out_dir.join("B.mtx").exists());
    assert!(out_dir.join("C.mtx").exists());
    assert!(!out_dir.join("S.mtx").exists());

    let manifest = fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"solver\": \"ls\""));
    assert!(manifest.contains("\"seed\": 1"));
}

#[test]
fn au_solver_trace_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let out_dir = dir.path().join("run");
    let out = run(&[
        "factorize",
        "--input",
        input.to_str().unwrap(),
        "--solver",
        "au-u",
        "--alpha",
        "0.1",
        "--rank",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let objectives: Vec<f64> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for w in objectives.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0]), "{} > {}", w[1], w[0]);
    }
}

#[test]
fn beta_with_uni_orthogonal_solver_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let out = run(&[
        "factorize",
        "--input",
        input.to_str().unwrap(),
        "--solver",
        "d-u",
        "--beta",
        "1",
        "--rank",
        "2",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--beta"));
}

#[test]
fn parse_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mtx");
    write(
        &bad,
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 zzz 1.0\n",
    );
    let out = run(&[
        "factorize",
        "--input",
        bad.to_str().unwrap(),
        "--solver",
        "ls",
        "--rank",
        "1",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn damping_cap_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let out = run(&[
        "factorize",
        "--input",
        input.to_str().unwrap(),
        "--solver",
        "au-u",
        "--alpha",
        "1000",
        "--max-inner-iter",
        "0",
        "--rank",
        "2",
        "--seed",
        "3",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("damping"));
}

fn perfect_factors(dir: &Path) {
    write(
        &dir.join("B.mtx"),
        "%%MatrixMarket matrix array real general\n3 2\n1.0\n0.9\n0.1\n0.0\n0.2\n0.8\n",
    );
    // Columns 0-3 peak on row 0, columns 4-7 on row 1.
    let mut c = String::from("%%MatrixMarket matrix array real general\n2 8\n");
    for j in 0..8 {
        if j < 4 {
            c.push_str("0.9\n0.1\n");
        } else {
            c.push_str("0.1\n0.9\n");
        }
    }
    write(&dir.join("C.mtx"), &c);
}

#[test]
fn evaluate_prints_and_writes_metrics() {
    let dir = tempfile::tempdir().unwrap();
    perfect_factors(dir.path());
    let labels = dir.path().join("labels.txt");
    write(&labels, "x\nx\nx\nx\ny\ny\ny\ny\n");
    let out = run(&[
        "evaluate",
        "--factors",
        dir.path().to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--side",
        "doc",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("purity 1.000000"), "{text}");
    assert!(text.contains("mi 1.000000"), "{text}");
    assert!(dir.path().join("metrics-doc.csv").exists());
}

#[test]
fn evaluate_reproduces_the_worked_mi_value() {
    // Assignment (0,0,0,0,1,1,1,1) against classes (x,x,x,y,y,y,y,y)
    // gives the counts [[3,1],[0,4]].
    let dir = tempfile::tempdir().unwrap();
    perfect_factors(dir.path());
    let labels = dir.path().join("labels.txt");
    write(&labels, "x\nx\nx\ny\ny\ny\ny\ny\n");
    let out = run(&[
        "evaluate",
        "--factors",
        dir.path().to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--side",
        "doc",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mi: f64 = text
        .lines()
        .find(|l| l.starts_with("mi "))
        .unwrap()
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((mi - 0.5488).abs() < 1e-3, "mi printed as {mi}");
    let fm: f64 = text
        .lines()
        .find(|l| l.starts_with("fmeasure "))
        .unwrap()
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((fm - 0.873).abs() < 1e-3, "fmeasure printed as {fm}");
}

#[test]
fn evaluate_rejects_wrong_label_length() {
    let dir = tempfile::tempdir().unwrap();
    perfect_factors(dir.path());
    let labels = dir.path().join("labels.txt");
    write(&labels, "x\ny\n");
    let out = run(&[
        "evaluate",
        "--factors",
        dir.path().to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--side",
        "doc",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_per_value_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let out_dir = dir.path().join("sweep");
    let out = run(&[
        "sweep",
        "--param",
        "alpha",
        "--values",
        "0.01,1,1000",
        "--input",
        input.to_str().unwrap(),
        "--solver",
        "mu-u",
        "--rank",
        "2",
        "--seed",
        "7",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for tok in ["0.01", "1", "1000"] {
        assert!(out_dir.join(format!("trace_alpha_{tok}.csv")).exists());
    }
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "value,final_objective,inner_iters,violations");
}

#[test]
fn sweep_with_au_solver_reports_zero_violations() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let out_dir = dir.path().join("sweep");
    let out = run(&[
        "sweep",
        "--param",
        "alpha",
        "--values",
        "0.01,1,1000",
        "--input",
        input.to_str().unwrap(),
        "--solver",
        "au-u",
        "--rank",
        "2",
        "--seed",
        "7",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    for line in summary.lines().skip(1) {
        let violations: usize = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(violations, 0, "line: {line}");
    }
}

#[test]
fn sweep_rejects_an_empty_value_list() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let out = run(&[
        "sweep",
        "--param",
        "alpha",
        "--values",
        ",",
        "--input",
        input.to_str().unwrap(),
        "--solver",
        "mu-u",
        "--rank",
        "2",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_rejects_beta_for_uni_orthogonal_solver() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let out = run(&[
        "sweep",
        "--param",
        "beta",
        "--values",
        "0.1,1",
        "--input",
        input.to_str().unwrap(),
        "--solver",
        "au-u",
        "--rank",
        "2",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_invocations_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let mut outputs = Vec::new();
    for name in ["r1", "r2"] {
        let out_dir = dir.path().join(name);
        let out = run(&[
            "factorize",
            "--input",
            input.to_str().unwrap(),
            "--solver",
            "au-b",
            "--alpha",
            "0.7",
            "--beta",
            "1",
            "--rank",
            "2",
            "--seed",
            "11",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(out_dir);
    }
    for name in ["trace.csv", "B.mtx", "C.mtx", "S.mtx", "manifest.json"] {
        let x = fs::read(outputs[0].join(name)).unwrap();
        let y = fs::read(outputs[1].join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn normalize_flag_changes_the_input_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_matrix(dir.path());
    let plain = dir.path().join("plain");
    let scaled = dir.path().join("scaled");
    for (out_dir, extra) in [(&plain, false), (&scaled, true)] {
        let mut args = vec![
            "factorize",
            "--input",
            input.to_str().unwrap(),
            "--solver",
            "ls",
            "--rank",
            "2",
            "--seed",
            "5",
            "--out",
            out_dir.to_str().unwrap(),
        ];
        if extra {
            args.push("--normalize");
        }
        assert!(run(&args).status.success());
    }
    let a = fs::read_to_string(plain.join("trace.csv")).unwrap();
    let b = fs::read_to_string(scaled.join("trace.csv")).unwrap();
    assert_ne!(
        a, b,
        "column normalization should change the objective scale"
    );
}
