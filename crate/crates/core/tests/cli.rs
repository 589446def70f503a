use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hiep::ep::{default_nil_tol, detect_ep};
use hiep::models::pt_trimer;
use serde_json::Value;
use tempfile::TempDir;

fn hiep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hiep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_named_trimer() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "trimer.json",
        r#"{"model": "trimer", "omega0": 1.0, "g_b": 1.3}"#,
    );
    let v = json(&hiep(&["analyze", "--input", s(&input)]));
    assert_eq!(v["order"], 3);
    assert_eq!(v["partial"], false);
    let xi = v["response_strength"].as_f64().unwrap();
    assert!((xi - 6.76).abs() <= 1e-10 * 6.76);
}

#[test]
fn analyze_matrix_file_round_trips_numbers() {
    let dir = TempDir::new().unwrap();
    let h = pt_trimer(0.25, 0.7).unwrap();
    let input = write(dir.path(), "m.json", &serde_json::to_string(&h).unwrap());
    let v = json(&hiep(&["analyze", "--input", s(&input)]));
    let report = detect_ep(&h, default_nil_tol(3)).unwrap();
    // Emitted numbers parse back to the exact computed values.
    assert_eq!(
        v["response_strength"].as_f64().unwrap(),
        report.xi().unwrap()
    );
    assert_eq!(
        v["ep_eigenvalue"][0].as_f64().unwrap(),
        report.ep_eigenvalue.re
    );
}

#[test]
fn analyze_non_ep_reports_no_order() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "d.json",
        r#"{"rows": 2, "cols": 2, "entries": [[0,0],[0,0],[0,0],[1,0]]}"#,
    );
    let out_path = dir.path().join("report.json");
    let out = hiep(&["analyze", "--input", s(&input), "--out", s(&out_path)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["order"], Value::Null);
    assert_eq!(v["partial"], true);
}

#[test]
fn jordan_command_reports_chain() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "dimer.json",
        r#"{"model": "dimer", "omega0": 1.0, "g_a": 1.5}"#,
    );
    let v = json(&hiep(&["jordan", "--input", s(&input)]));
    assert_eq!(v["n"], 2);
    assert!((v["response_strength"].as_f64().unwrap() - 3.0).abs() < 1e-10);
    assert_eq!(v["vectors"].as_array().unwrap().len(), 2);
    assert!(v["residuals"]["kernel"].as_f64().unwrap() < 1e-10);

    let flat = write(
        dir.path(),
        "zero.json",
        r#"{"rows": 2, "cols": 2, "entries": [[0,0],[0,0],[0,0],[0,0]]}"#,
    );
    assert_eq!(
        hiep(&["jordan", "--input", s(&flat)]).status.code(),
        Some(3)
    );
}

#[test]
fn compose_named_system() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "sys.json",
        r#"{"model": "dimer_trimer", "omega0": 1.0, "g_a": 1.5, "g_b": 1.3, "k": [1.0, 0.0]}"#,
    );
    let v = json(&hiep(&["compose", "--input", s(&input)]));
    let expected = 8f64.sqrt() * 1.5 * 1.69;
    assert_eq!(v["order"], 5);
    assert!((v["response_strength"].as_f64().unwrap() - expected).abs() <= 1e-10 * expected);
    assert!(
        (v["factorized_response_strength"].as_f64().unwrap() - expected).abs() <= 1e-8 * expected
    );
    assert!((v["upper_bound"].as_f64().unwrap() - 20.28).abs() <= 1e-10 * 20.28);
    assert_eq!(v["genericity"]["generic"], true);
}

#[test]
fn compose_with_zero_coupling_exits_3() {
    let dir = TempDir::new().unwrap();
    let a = write(
        dir.path(),
        "a.json",
        r#"{"rows": 2, "cols": 2, "entries": [[1,1.5],[1.5,0],[1.5,0],[1,-1.5]]}"#,
    );
    let b = write(
        dir.path(),
        "b.json",
        &serde_json::to_string(&pt_trimer(1.0, 1.3).unwrap()).unwrap(),
    );
    let k = write(
        dir.path(),
        "k.json",
        r#"{"rows": 3, "cols": 2, "entries": [[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#,
    );
    let out = hiep(&["compose", "--a", s(&a), "--b", s(&b), "--k", s(&k)]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("degenerate coupling"), "{stderr}");

    let k1 = write(
        dir.path(),
        "k1.json",
        r#"{"rows": 3, "cols": 2, "entries": [[1,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#,
    );
    let v = json(&hiep(&[
        "compose",
        "--a",
        s(&a),
        "--b",
        s(&b),
        "--k",
        s(&k1),
    ]));
    assert_eq!(v["order"], 5);
}

#[test]
fn parse_failures_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(
        hiep(&["analyze", "--input", s(&bad)]).status.code(),
        Some(2)
    );
    let shape = write(
        dir.path(),
        "shape.json",
        r#"{"rows": 2, "cols": 2, "entries": [[1,0]]}"#,
    );
    assert_eq!(
        hiep(&["analyze", "--input", s(&shape)]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        hiep(&["analyze", "--input", s(&missing)]).status.code(),
        Some(2)
    );
    assert_eq!(hiep(&["analyze"]).status.code(), Some(2));
    assert_eq!(
        hiep(&[
            "sweep",
            "--input",
            s(&bad),
            "--out",
            "x.csv",
            "--mode",
            "sideways"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn invalid_flags_rejected_before_work() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "sys.json",
        r#"{"model": "dimer_trimer", "omega0": 1.0, "g_a": 1.5, "g_b": 1.3, "k": [1.0, 0.0]}"#,
    );
    let csv = dir.path().join("s.csv");
    let out = hiep(&[
        "sweep",
        "--input",
        s(&input),
        "--out",
        s(&csv),
        "--eps-min",
        "1e-2",
        "--eps-max",
        "1e-3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!csv.exists());

    let plain = write(
        dir.path(),
        "plain.json",
        &serde_json::to_string(&pt_trimer(1.0, 1.3).unwrap()).unwrap(),
    );
    let out = hiep(&[
        "sweep",
        "--input",
        s(&plain),
        "--out",
        s(&csv),
        "--mode",
        "preserving",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "sys.json",
        r#"{"model": "dimer_trimer", "omega0": 1.0, "g_a": 1.5, "g_b": 1.3, "k": [1.0, 0.0]}"#,
    );
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let out = hiep(&[
            "sweep",
            "--input",
            s(&input),
            "--mode",
            "preserving",
            "--eps-min",
            "1e-9",
            "--eps-max",
            "1e-3",
            "--points",
            "7",
            "--trials",
            "3",
            "--seed",
            "5",
            "--out",
            s(&csv),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        (fs::read(&csv).unwrap(), out.stdout)
    };
    let (csv1, fit1) = run("one.csv");
    let (csv2, fit2) = run("two.csv");
    assert_eq!(csv1, csv2);
    assert_eq!(fit1, fit2);

    let text = String::from_utf8(csv1).unwrap();
    let records = hiep::perturb::records_from_csv(&text).unwrap();
    assert_eq!(records.len(), 21);
    let v: Value = serde_json::from_slice(&fit1).unwrap();
    assert_eq!(v["mode"], "preserving");
    assert!((v["fit"]["slope"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.05);
}

#[test]
fn reproduce_fig3_writes_tables() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("fig");
    let args = [
        "reproduce-fig3",
        "--points",
        "11",
        "--trials",
        "2",
        "--eps-min",
        "1e-8",
        "--eps-max",
        "1e-3",
        "--out",
        s(&out_dir),
    ];
    let first = hiep(&args);
    let v = json(&first);
    for name in ["fig3_generic.csv", "fig3_preserving.csv", "fig3_fits.json"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let generic = fs::read(out_dir.join("fig3_generic.csv")).unwrap();
    assert_eq!(
        fs::read_to_string(out_dir.join("fig3_fits.json"))
            .unwrap()
            .as_bytes(),
        &first.stdout[..]
    );
    assert!(v["generic"]["slope"].as_f64().is_some());
    assert!(
        v["saturation"]["measured"].as_f64().unwrap() <= v["saturation"]["bound"].as_f64().unwrap()
    );

    let second = hiep(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(generic, fs::read(out_dir.join("fig3_generic.csv")).unwrap());
}
