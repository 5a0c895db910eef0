use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bidisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bidisk"))
        .args(args)
        .env_remove("BIDISK_JULIA_SEED")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = bidisk(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

fn csv_rows(out: &Output) -> Vec<Vec<f64>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,z1_re,z1_im,z2_re,z2_im,aperture,quotient"));
    lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn classify_builtins() {
    let v = ok_json(&["classify", "--builtin", "phi1", "--tau", "1,0,1,0"]);
    assert_eq!(v["verdict"], "C");
    assert_eq!(v["schema"], 1);
    let v = ok_json(&["classify", "--builtin", "phi3", "--tau", "1,0,1,0"]);
    assert_eq!(v["verdict"], "B");
    let v = ok_json(&["classify", "--builtin", "phi4", "--param", "N=20", "--tau", "1,0,1,0"]);
    assert_eq!(v["verdict"], "C");
    assert!(v["escalation"].is_object());
    let warnings: Vec<&str> = v["warnings"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect();
    assert!(warnings.iter().any(|w| w.contains("grows geometrically")), "{warnings:?}");
}

#[test]
fn radial_sweep_of_phi1() {
    let out = bidisk(&["sweep", "--builtin", "phi1", "--apertures", "1", "--depth", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 10);
    for row in rows {
        let r = row[1];
        assert!((row[6] - (1.0 + r)).abs() < 1e-12, "{row:?}");
    }
}

#[test]
fn phi4_sweep_hits_the_zeros() {
    let out = bidisk(&["sweep", "--builtin", "phi4", "--param", "N=10", "--apertures", "1", "--depth", "10"]);
    let rows = csv_rows(&out);
    for (n, row) in (1..).zip(rows) {
        assert_eq!(row[0], 0.5f64.powi(n));
        assert_eq!(row[6], 2f64.powi(n));
    }
}

#[test]
fn sweep_as_json() {
    let v = ok_json(&["sweep", "--builtin", "phi2", "--apertures", "1,2", "--depth", "8", "--format", "json"]);
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.len() > 8);
    assert!(rows.iter().all(|r| r["aperture"].as_f64().unwrap() <= 2.0 + 1e-12));
}

#[test]
fn config_errors_exit_one() {
    for args in [
        vec!["sweep", "--builtin", "phi1", "--apertures", "0.5"],
        vec!["classify", "--builtin", "phi9"],
        vec!["classify", "--builtin", "phi1", "--depth", "4"],
        vec!["classify", "--builtin", "phi1", "--tau", "1,0,0.5,0"],
        vec!["classify", "--builtin", "phi1", "--apertures", "4,2"],
        vec!["classify", "--builtin", "phi4", "--param", "N=zero"],
        vec!["classify"],
        vec!["decompose", "--measure-json", "/nonexistent/measure.json"],
    ] {
        let out = bidisk(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn convention_fault_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", r#"{"function": {"builtin": "phi1"}, "classifier": {"convention": "swapped"}}"#);
    let out = bidisk(&["classify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"function": {"builtin": "phi3"}, "tau": [[1, 0], [1, 0]], "classifier": {"apertures": [1, 3]}}"#,
    );
    let v = ok_json(&["classify", "--config", &cfg]);
    assert_eq!(v["verdict"], "B");
    assert_eq!(v["gamma_by_aperture"].as_array().unwrap().len(), 2);
    let bad = write(dir.path(), "bad.json", r#"{"function": {"builtin": "phi3"}, "colour": 1}"#);
    assert_eq!(bidisk(&["classify", "--config", &bad]).status.code(), Some(1));
}

#[test]
fn decompose_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"density": {"kind": "constant", "coeffs": [1]}}"#, 2.0, 2.0, true, false),
        (r#"{"atoms": [{"t": 1, "w": 1}]}"#, 0.0, 2.0, true, true),
        (r#"{"atoms": [{"t": 0, "w": 1}]}"#, 1.0, 1.0, false, false),
    ];
    for (i, (json, a, b, bounded, linear)) in cases.into_iter().enumerate() {
        let p = write(dir.path(), &format!("m{i}.json"), json);
        let v = ok_json(&["decompose", "--measure-json", &p]);
        assert!((v["A"].as_f64().unwrap() - a).abs() < 1e-12, "{json}");
        assert!((v["B"].as_f64().unwrap() - b).abs() < 1e-12, "{json}");
        assert_eq!(v["g_bound_probe"]["bounded"], bounded, "{json}");
        assert_eq!(v["linearity"]["is_linear"], linear, "{json}");
    }
    let p = write(dir.path(), "broken.json", r#"{"atoms": [{"t": 3, "w": 1}]}"#);
    assert_eq!(bidisk(&["decompose", "--measure-json", &p]).status.code(), Some(1));
}

#[test]
fn derivative_along_a_direction() {
    let v = ok_json(&["derivative", "--builtin", "phi2", "--direction", "-1,0,-1,0"]);
    let d = &v["derivative"]["value"];
    assert!((d[0].as_f64().unwrap() + 4.0).abs() < 1e-6);
    assert!(d[1].as_f64().unwrap().abs() < 1e-6);
    let out = bidisk(&["derivative", "--builtin", "phi2", "--direction", "1,0,-1,0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn construct_checks_and_echoes_the_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    // phi3 written out as coefficient grids
    let f = write(
        dir.path(),
        "phi3.json",
        r#"{"rational": {"numer": [[[0,0],[-1,0]],[[-2,0],[3,0]]], "denom": [[[3,0],[-2,0]],[[-1,0]]]}}"#,
    );
    let v = ok_json(&["construct", "--function-json", &f]);
    assert_eq!(v["is_rational"], true);
    assert!(v["schur_sample_max"].as_f64().unwrap() <= 1.0 + 1e-9);
    let not_schur = write(dir.path(), "big.json", r#"{"rational": {"numer": [[[2,0]]], "denom": [[[1,0]]]}}"#);
    assert_eq!(bidisk(&["construct", "--function-json", &not_schur]).status.code(), Some(1));
    let v = ok_json(&["classify", "--function-json", &f]);
    assert_eq!(v["verdict"], "B");
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = bidisk(&["classify", "--builtin", "phi1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["verdict"], "C");
}

#[test]
fn list_examples() {
    let out = bidisk(&["list-examples"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["phi1", "phi2", "phi3", "phi4"] {
        assert!(text.contains(name));
    }
    let v = ok_json(&["list-examples", "--format", "json"]);
    assert_eq!(v.as_array().unwrap().len(), 4);
}
