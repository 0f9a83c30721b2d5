use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn abcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abcs")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let o = abcs(args);
    let v = serde_json::from_slice(&o.stdout).unwrap_or(Value::Null);
    (v, o.status.code().unwrap_or(-1))
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn maslov_files() {
    let (v, code) = json(&["maslov", &data("triple_standard.json")]);
    assert_eq!((v["tau"].as_i64(), code), (Some(-1), 0));
    assert_eq!(v["gram"].as_array().unwrap().len(), 3);
    let (v, code) = json(&["maslov", &data("triple_repeated.json")]);
    assert_eq!((v["tau"].as_i64(), code), (Some(0), 0));
    let o = abcs(&["maslov", &data("triple_not_isotropic.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not isotropic"));
}

#[test]
fn rep_generators() {
    let (v, _) = json(&["rep", "-k", "2", "-w", "T"]);
    let m = &v["matrix"];
    assert_eq!(complex(&m[0][0]), (1.0, 0.0));
    assert_eq!(complex(&m[1][1]), (0.0, 1.0));
    assert_eq!(complex(&m[0][1]), (0.0, 0.0));
    let (v, _) = json(&["rep", "-k", "2", "-w", "S"]);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for (i, j, s) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)] {
        let (re, im) = complex(&v["matrix"][i][j]);
        assert!((re - s * r).abs() < 1e-15 && im.abs() < 1e-15);
    }
    let (v, code) = json(&["rep", "-k", "4", "-g", "2", "-w", ""]);
    assert_eq!(code, 0);
    let m = v["matrix"].as_array().unwrap();
    assert_eq!(m.len(), 16);
    assert!(m.iter().enumerate().all(|(i, row)| row.as_array().unwrap().iter().enumerate().all(|(j, z)| complex(z) == (if i == j { 1.0 } else { 0.0 }, 0.0))));
    let (v, code) = json(&["rep", "-k", "2", "-e", "[[2,1],[1,1]]"]);
    assert_eq!(code, 0);
    assert_eq!(v["symplectic"], serde_json::json!([[2, 1], [1, 1]]));
    assert!(v["unitarity_residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(abcs(&["rep", "-w", "X"]).status.code(), Some(2));
    assert_eq!(abcs(&["rep", "-k", "3", "-w", "S"]).status.code(), Some(2));
}

#[test]
fn invariants() {
    let (v, code) = json(&["invariant", "lens", "-p", "1", "-k", "4"]);
    let (re, im) = complex(&v["value"]);
    assert_eq!(code, 0);
    assert!(((re * re + im * im).sqrt() - 0.5).abs() < 1e-12);
    let (v, code) = json(&["invariant", "lens", "-p", "5", "-k", "2"]);
    assert_eq!((code, v["framing"].as_i64()), (0, Some(1)));
    let (v, _) = json(&["invariant", "mapping-torus", "-g", "2", "-k", "2", "-w", ""]);
    let (re, im) = complex(&v["value"]);
    assert!((re - 4.0).abs() < 1e-12 && im.abs() < 1e-12);
    let (v, _) = json(&["invariant", "heegaard", "-w", "S", "-k", "2"]);
    let (re, im) = complex(&v["value"]);
    assert!(((re * re + im * im).sqrt() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    let (v, code) = json(&["invariant", "heegaard", "-f", &data("genus2_word.json"), "-k", "2"]);
    assert_eq!(code, 0);
    assert!(v["residual"].as_f64().unwrap() < 1e-9);
    let (v, code) = json(&["invariant", "simplicial", &data("sphere3.json"), "-k", "4"]);
    assert_eq!((code, complex(&v["value"])), (0, (0.5, 0.0)));
    let (v, code) = json(&["invariant", "simplicial", &data("solid_torus.json"), "-k", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["vector"].as_array().unwrap().len(), 4);
    assert_eq!(abcs(&["invariant", "simplicial", &data("lens_3_1.json")]).status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let (v, code) = json(&["verify", "cocycle", "-k", "2"]);
    assert_eq!((code, v["passed"].as_bool()), (0, Some(true)));
    let (v, code) = json(&["verify", "cocycle", "-k", "3"]);
    assert_eq!((code, v["passed"].as_bool()), (3, Some(false)));
    assert!(v["checks"][0]["detail"].as_str().unwrap().contains("witness"));
    assert_eq!(abcs(&["verify", "torsion", "--tolerance", "0.5"]).status.code(), Some(2));
}

#[test]
fn deterministic_output() {
    let a = abcs(&["verify", "torsion", "--seed", "7"]);
    let b = abcs(&["verify", "torsion", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let dir = std::env::temp_dir().join(format!("abcs-out-{}", std::process::id()));
    let out = dir.with_extension("json");
    assert_eq!(abcs(&["rep", "-w", "S T", "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["genus"].as_i64(), Some(1));
    std::fs::remove_file(out).ok();
}
