use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locgauss"))
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn incommensurate_pair_exits_three() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"xi": [2, 2, 1, 1]}"#);
    let b = write(&dir, "b.json", r#"{"xi": [2, 2, 1, -0.5]}"#);
    for (from, to) in [(&a, &b), (&b, &a)] {
        let out = run(&["decide", "--from", s(from), "--to", s(to), "--general"]);
        assert_eq!(out.status.code(), Some(3));
        let v = json(&out);
        assert_eq!(v["possible"], Value::Bool(false));
        assert!(v["witness"].is_null());
    }
    let out = run(&["compare", "--a", s(&a), "--b", s(&b)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["relation"], "Incommensurate");
}

#[test]
fn state_reaches_itself() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"xi": [3, 5, 1, 0.5]}"#);
    for extra in [&["--general"][..], &["--local", "1"], &["--local", "2"]] {
        let mut args = vec!["decide", "--from", s(&a), "--to", s(&a)];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{extra:?}");
        assert_eq!(json(&out)["possible"], Value::Bool(true));
    }
}

#[test]
fn local_witness_is_printed() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"xi": [3, 5, 1, 0.5]}"#);
    let b = write(&dir, "b.json", r#"{"xi": [2, 5, 0.4, 0.3]}"#);
    let out = run(&["decide", "--from", s(&a), "--to", s(&b), "--local", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["route"], "local1");
    assert_eq!(v["witness"]["kind"], "local1");
    let g11 = v["witness"]["g1"][0][0].as_f64().unwrap();
    assert!((g11 - 1.52).abs() < 1e-12);
    assert_eq!(v["witness"]["map"]["m"].as_array().unwrap().len(), 4);
}

#[test]
fn degenerate_mode_flags() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"xi": [2, 2, 1, 0]}"#);
    let strict = run(&["decide", "--from", s(&a), "--to", s(&a), "--strict"]);
    assert_eq!(strict.status.code(), Some(3));
    let closure = run(&[
        "decide",
        "--from",
        s(&a),
        "--to",
        s(&a),
        "--reflexive-closure",
    ]);
    assert_eq!(closure.status.code(), Some(0));
    assert_eq!(json(&closure)["witness"]["kind"], "identity");
    let both = run(&[
        "decide",
        "--from",
        s(&a),
        "--to",
        s(&a),
        "--strict",
        "--reflexive-closure",
    ]);
    assert_eq!(both.status.code(), Some(1));
}

#[test]
fn region_csv_respects_window() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "s.json", r#"{"xi": [3, 5, 1, 0.5]}"#);
    let csv = dir.path().join("region.csv");
    let out = run(&[
        "region",
        "--state",
        s(&state),
        "--xi1pp",
        "2",
        "--xmin",
        "0",
        "--xmax",
        "1.2",
        "--ymin",
        "-0.8",
        "--ymax",
        "0.8",
        "--nx",
        "200",
        "--ny",
        "200",
        "--out",
        s(&csv),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi3pp,xi4pp,feasible,f1"));
    let (mut rows, mut feasible) = (0, 0);
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        rows += 1;
        if cols[2] == 1.0 {
            feasible += 1;
            assert!((cols[0] * cols[1]).abs() <= 1.0 / 3.0 + 1e-9, "{line}");
        }
    }
    assert_eq!(rows, 200 * 200);
    assert!(feasible > 0);
}

#[test]
fn invariants_round_trip_through_xi_files() {
    let dir = TempDir::new().unwrap();
    let cov = write(
        &dir,
        "cov.json",
        r#"{"covariance": [[2.5, 0.3, 0.9, 0.1], [0.3, 1.8, 0.2, -0.4], [0.9, 0.2, 2.1, 0.0], [0.1, -0.4, 0.0, 1.6]]}"#,
    );
    let out = run(&["invariants", s(&cov)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let printed = String::from_utf8(out.stdout).unwrap();
    let xi_file = write(&dir, "xi.json", &printed);
    let target = write(&dir, "t.json", r#"{"xi": [3, 3, 0.5, 0.2]}"#);
    let via_cov = run(&["decide", "--from", s(&cov), "--to", s(&target)]);
    let via_xi = run(&["decide", "--from", s(&xi_file), "--to", s(&target)]);
    assert_eq!(via_cov.status.code(), via_xi.status.code());
    assert_eq!(json(&via_cov)["possible"], json(&via_xi)["possible"]);

    let red = json(&run(&["reduce", s(&cov)]));
    let nf = &red["normal_form"];
    let xi: Vec<f64> = red["xi"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((nf[0][0].as_f64().unwrap() - xi[0]).abs() < 1e-8);
    assert!((nf[0][2].as_f64().unwrap() - xi[2]).abs() < 1e-8);
    assert!((nf[1][3].as_f64().unwrap() - xi[3]).abs() < 1e-8);
}

#[test]
fn validate_reports_states() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.json", r#"{"xi": [1.25, 1.25, 0.75, -0.75]}"#);
    let out = run(&["validate", s(&good)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["valid"], Value::Bool(true));

    let bad = write(
        &dir,
        "bad.json",
        r#"{"covariance": [[0.5,0,0,0],[0,0.5,0,0],[0,0,1,0],[0,0,0,1]]}"#,
    );
    let out = run(&["validate", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["valid"], Value::Bool(false));
    assert_eq!(run(&["invariants", s(&bad)]).status.code(), Some(2));
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = TempDir::new().unwrap();
    let both = write(
        &dir,
        "both.json",
        r#"{"xi": [1, 1, 0, 0], "covariance": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#,
    );
    let junk = write(&dir, "junk.json", "not json");
    let short = write(&dir, "short.json", r#"{"xi": [1, 1, 0]}"#);
    for f in [&both, &junk, &short] {
        assert_eq!(run(&["invariants", s(f)]).status.code(), Some(1), "{f:?}");
    }
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["validate", s(&missing)]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let ok = write(&dir, "ok.json", r#"{"xi": [3, 5, 1, 0.5]}"#);
    let other = write(&dir, "other.json", r#"{"xi": [3, 4, 1, 0.5]}"#);
    // mode 2 differs, so a mode-1 operation is not a well-posed question
    assert_eq!(
        run(&[
            "decide",
            "--from",
            s(&ok),
            "--to",
            s(&other),
            "--local",
            "1"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&["decide", "--from", s(&ok), "--to", s(&ok), "--local", "3"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn oracle_check_agrees() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"xi": [2, 2, 1, 0.5]}"#);
    let b = write(&dir, "b.json", r#"{"xi": [3, 2, 1, 0.5]}"#);
    for (from, to, expect) in [(&a, &b, true), (&b, &a, false)] {
        let out = run(&[
            "oracle-check",
            "--from",
            s(from),
            "--to",
            s(to),
            "--nx",
            "512",
            "--ny",
            "512",
        ]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&out);
        assert_eq!(v["decision"], Value::Bool(expect));
        assert_eq!(v["agree"], Value::Bool(true));
    }
}

#[test]
fn library_entry_point() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = locgauss_cli::run(["locgauss", "--version"], &mut out, &mut err);
    assert_eq!(code, 0);
}
