use std::{path::Path, process::Command};

use serde_json::Value;

fn carnot(args: &[&str], dir: &Path) -> (i32, String, String) {
    carnot_env(args, dir, &[])
}

fn carnot_env(args: &[&str], dir: &Path, env: &[(&str, &Path)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_carnot"));
    cmd.args(args).current_dir(dir).env_remove("CARNOT_PRESET_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = carnot(&["heis", "build", "--g", "abs-x", "--out", "ball.json"], dir.path());
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["offset"].as_f64(), Some(4.25));
    let (code, out, err) = carnot(&["ball", "verify", "ball.json", "--samples", "100000", "--seed", "7"], dir.path());
    assert_eq!(code, 0, "{err}");
    let rep = json(&out);
    assert_eq!(rep["passed"], Value::Bool(true));
    let comb = rep["checks"].as_array().unwrap().iter().find(|c| c["check"] == "combination").unwrap();
    assert_eq!(comb["samples"].as_u64(), Some(100_000));
    for cmd in [vec!["heis", "check62", "ball.json"], vec!["heis", "profile", "ball.json"], vec!["heis", "star", "ball.json", "--seed", "3"]] {
        let (code, _, err) = carnot(&cmd, dir.path());
        assert_eq!(code, 0, "{cmd:?}: {err}");
    }
}

#[test]
fn reports_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    carnot(&["heis", "build", "--out", "ball.json"], dir.path());
    let run = |w: &str| carnot(&["ball", "verify", "ball.json", "--samples", "20000", "--seed", "11", "--workers", w], dir.path()).1;
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(one, run("8"));
    let scan = |w: &str| carnot(&["control", "scan", "--group", "engel", "--count", "40", "--workers", w], dir.path()).1;
    assert_eq!(scan("1"), scan("4"));
}

#[test]
fn broken_group_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    // [e0, e1] lands in a weight-1 coordinate.
    std::fs::write(dir.path().join("broken.json"), r#"{"dim": 3, "weights": [1, 1, 1], "brackets": [[0, 1, 2, 1.0]]}"#).unwrap();
    let (code, out, _) = carnot(&["group", "validate", "broken.json"], dir.path());
    assert_eq!(code, 1);
    let rep = json(&out);
    assert_eq!(rep["valid"], Value::Bool(false));
    assert!(rep["violations"].as_array().unwrap().iter().any(|v| v["kind"] == "grading"));
    let (code, out, _) = carnot(&["group", "validate", "engel"], dir.path());
    assert_eq!((code, json(&out)["valid"].clone()), (0, Value::Bool(true)));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["frobnicate"],
        &["ball", "euclid"],
        &["norm", "eval", "--gauge", "nope", "--point", "1,0,0"],
        &["norm", "eval", "--point", "1,0"],
        &["group", "info", "missing.json"],
        &["--preset", "nope"],
    ];
    for args in cases {
        let (code, _, err) = carnot(args, dir.path());
        assert_eq!(code, 2, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn paper_preset_reports_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = carnot(&["plane", "fractal", "--preset", "paper", "--dim"], dir.path());
    assert_eq!(code, 0, "{err}");
    let d = json(&out)["dimension"]["report"]["dimension"].as_f64().unwrap();
    assert!((1.4..=1.6).contains(&d), "{d}");
}

#[test]
fn preset_directory_overrides_and_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let presets = dir.path().join("presets");
    std::fs::create_dir(&presets).unwrap();
    std::fs::write(
        presets.join("ax.json"),
        r#"{"command": ["norm", "axioms"], "group": "heisenberg", "args": {"gauge": "koranyi", "samples": 500}, "seed": 4}"#,
    )
    .unwrap();
    std::fs::write(presets.join("bad.json"), r#"{"command": ["group", "info"], "colour": "red"}"#).unwrap();
    let env = [("CARNOT_PRESET_DIR", presets.as_path())];
    let (code, out, err) = carnot_env(&["--preset", "ax"], dir.path(), &env);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["checks"][0]["samples"].as_u64(), Some(500));
    // User flags after the preset win.
    let (_, out, _) = carnot_env(&["--preset", "ax", "--samples", "200"], dir.path(), &env);
    assert_eq!(json(&out)["checks"][0]["samples"].as_u64(), Some(200));
    let (code, _, _) = carnot_env(&["--preset", "bad"], dir.path(), &env);
    assert_eq!(code, 2);
}

#[test]
fn y_region_witness_fails_above_window() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = carnot(&["plane", "yregion", "--c", "1.25", "--samples", "1000", "--seed", "1"], dir.path());
    assert_eq!(code, 1);
    assert_eq!(json(&out)["witness"]["margin"].as_f64(), Some(-0.125));
    let (code, _, _) = carnot(&["plane", "yregion", "--c", "1", "--samples", "1000", "--seed", "1"], dir.path());
    assert_eq!(code, 0);
}

#[test]
fn sphere_csv_and_control_files() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = carnot(&["sphere", "sample", "--gauge", "koranyi", "--samples", "50", "--seed", "2", "--csv", "s.csv"], dir.path());
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("d0,d1,d2,gauge,s0,s1,s2"));
    assert_eq!(text.lines().count(), 51);

    std::fs::write(dir.path().join("u.json"), r#"{"m": 2, "values": [[1.0, 0.0], [0.0, 1.0]], "norm": "euclidean"}"#).unwrap();
    let (code, out, err) = carnot(&["control", "endpoint", "--control", "u.json", "--ode", "400"], dir.path());
    assert_eq!(code, 0, "{err}");
    let rep = json(&out);
    let p: Vec<f64> = rep["endpoint"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    // (½,0,0)·(0,½,0) has z = ½·½·½.
    assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15 && (p[2] - 0.125).abs() < 1e-15, "{p:?}");
    assert!(rep["max_difference"].as_f64().unwrap() < 1e-12);
    let (code, out, _) = carnot(&["control", "tau", "--control", "u.json"], dir.path());
    assert_eq!(code, 0);
    assert!(json(&out)["tau"].as_f64().unwrap() > 0.0);
}

#[test]
fn geodesic_and_info() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = carnot(&["control", "geodesic", "--target", "1,0,0", "--m", "8", "--restarts", "2", "--seed", "1"], dir.path());
    assert_eq!(code, 0, "{err}");
    assert!((json(&out)["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let (code, out, _) = carnot(&["group", "info", "engel-x-line"], dir.path());
    assert_eq!(code, 0);
    let rep = json(&out);
    assert_eq!((rep["dim"].as_u64(), rep["nilpotency_class"].as_u64()), (Some(5), Some(3)));
    let (code, out, _) = carnot(&["sphere", "cusp", "--group", "engel-x-line", "--gauge", "product:box", "--direction", "0,0,0,1,0"], dir.path());
    assert_eq!(code, 0);
    assert!((json(&out)["fit"]["exponent"].as_f64().unwrap() - 1.5).abs() < 0.05);
}
