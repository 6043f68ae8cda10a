use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lipstd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipstd"))
        .args(args)
        .current_dir(dir)
        .env_remove("LIPSTD_SEED")
        .output()
        .expect("spawn lipstd")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

const MIXED: &str = "x,flag,count,color\n1.5,0,3,red\n-2.25,1,0,blue\n0.75,1,5,red\n3.0,,2,green\n-1.0,0,7,blue\n2.5,1,1,red\n";

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "mixed.csv", MIXED);
    assert_eq!(lipstd(&["--help"], d).status.code(), Some(0));
    assert_eq!(lipstd(&["--version"], d).status.code(), Some(0));
    assert_eq!(lipstd(&["scale"], d).status.code(), Some(1));
    assert_eq!(lipstd(&["scale", "mixed.csv", "-o", "o.csv", "--method", "zscore"], d).status.code(), Some(1));
    assert_eq!(lipstd(&["scale", "mixed.csv", "-o", "o.csv", "--alpha", "-1"], d).status.code(), Some(1));
    assert_eq!(lipstd(&["scale", "missing.csv", "-o", "o.csv"], d).status.code(), Some(2));

    let out = lipstd(&["scale", "mixed.csv", "-o", "o.csv", "--trick", "none"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`flag`"));
    assert!(!d.join("o.csv").exists());
    let out = lipstd(&["scale", "mixed.csv", "-o", "o.csv", "--trick", "none", "--allow-unscaled-discrete"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // L* = 1/(Dα) below the Gamma floor L₁: best effort, with a warning
    let out = lipstd(&["scale", "mixed.csv", "-o", "w.csv", "--alpha", "10", "--format", "json"], d);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out.stdout);
    assert!(rows.as_array().unwrap().iter().any(|r| !r["warnings"].as_array().unwrap().is_empty()));

    write(d, "flat.csv", "a,b\n2.5,2\n2.5,3\n2.5,5\n");
    let out = lipstd(&["scale", "flat.csv", "-o", "f.csv", "--method", "std"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`a`"));
    assert!(!d.join("f.csv").exists());
}

#[test]
fn lip_gamma_sidecar_hits_targets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // balanced categories keep every Gamma column feasible
    let mut text = String::from("x,flag,count,color\n");
    for i in 0..60 {
        let x = ((i * 37) % 17) as f64 / 4.0 - 2.0;
        text.push_str(&format!("{x},{},{},{}\n", i % 2, (i * 7) % 5, ["red", "green", "blue"][i % 3]));
    }
    write(d, "mixed.csv", &text);
    let out = lipstd(&["scale", "mixed.csv", "-o", "s.csv", "--alpha", "0.01"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = json(&std::fs::read(d.join("s.csv.meta.json")).unwrap());
    let l_star = meta["target"]["l_star"].as_f64().unwrap();
    assert!((l_star - 25.0).abs() < 1e-12);
    for c in meta["columns"].as_array().unwrap() {
        let k = c["group_size"].as_f64().unwrap();
        let total = c["achieved"]["total"].as_f64().unwrap();
        assert!((total - l_star / k).abs() < 1e-6, "{}: {total}", c["name"]);
    }
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.starts_with("column"));
    assert!(table.contains("color#2"));
}

#[test]
fn std_gives_unit_population_std_and_none_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let text = "a;b\n1.5;10\n2.25;20\n-4;35.5\n0.125;41\n";
    write(d, "in.csv", text);
    write(d, "hints.json", r#"{"a": "real", "b": "real"}"#);
    let std = lipstd(&["scale", "in.csv", "-o", "std.csv", "--method", "std", "--delimiter", ";", "--hints", "hints.json"], d);
    assert!(std.status.success(), "{}", String::from_utf8_lossy(&std.stderr));
    let scaled = std::fs::read_to_string(d.join("std.csv")).unwrap();
    for col in 0..2 {
        let xs: Vec<f64> = scaled.lines().skip(1).map(|l| l.split(';').nth(col).unwrap().parse().unwrap()).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
        assert!((sd - 1.0).abs() < 1e-10, "column {col}: {sd}");
    }
    assert!(lipstd(&["scale", "in.csv", "-o", "none.csv", "--method", "none", "--delimiter", ";"], d).status.success());
    assert_eq!(std::fs::read_to_string(d.join("none.csv")).unwrap(), text);
    let meta = json(&std::fs::read(d.join("none.csv.meta.json")).unwrap());
    assert!(meta["columns"].as_array().unwrap().iter().all(|c| c["omega"] == 1.0));
}

#[test]
fn recover_round_trip_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "n.csv", "x\n1\n3\n2\n6\n");
    let hints = r#"{"x": {"family": "normal"}}"#;
    write(d, "hints.json", hints);
    let out = lipstd(&["scale", "n.csv", "-o", "s.csv", "--method", "max", "--hints", "hints.json"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // ω = 1/6; scaled N(μ̃, σ̃²) with μ̃ = 0.5, σ̃² = 0.25 maps back to
    // μ = 3, σ² = 9
    write(d, "learned.json", r#"{"x": [2.0, -2.0]}"#);
    let out = lipstd(&["recover", "--metadata", "s.csv.meta.json", "--params", "learned.json", "--format", "json"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = json(&out.stdout);
    let params: Vec<f64> = rec[0]["params"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((params[0] - 3.0).abs() < 1e-12 && (params[1] - 9.0).abs() < 1e-12, "{params:?}");

    write(d, "empty.json", "{}");
    let out = lipstd(&["recover", "--metadata", "s.csv.meta.json", "--params", "empty.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`x`"));
}

#[test]
fn recover_restores_discrete_families() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "mixed.csv", MIXED);
    assert!(lipstd(&["scale", "mixed.csv", "-o", "s.csv", "--seed", "3"], d).status.success());
    let meta = json(&std::fs::read(d.join("s.csv.meta.json")).unwrap());
    // learned parameters: the fitted Gamma of each scaled column
    let mut learned = serde_json::Map::new();
    for c in meta["columns"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        let fitted: Vec<f64> = c["fitted"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let omega = c["omega"].as_f64().unwrap();
        let eta = match c["family"].as_str().unwrap() {
            "normal" => vec![fitted[0] / fitted[1] / omega, -0.5 / fitted[1] / (omega * omega)],
            _ => vec![fitted[0] - 1.0, -fitted[1] / omega],
        };
        learned.insert(name.to_string(), serde_json::json!(eta));
    }
    write(d, "learned.json", &Value::Object(learned).to_string());
    let out = lipstd(&["recover", "--metadata", "s.csv.meta.json", "--params", "learned.json", "-o", "rec.json"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = json(&std::fs::read(d.join("rec.json")).unwrap());
    let families: Vec<&str> = rec.as_array().unwrap().iter().map(|r| r["family"].as_str().unwrap()).collect();
    assert_eq!(families, ["normal", "bernoulli", "poisson", "categorical(3)"]);
    let pi: f64 = rec[3]["params"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((pi - 1.0).abs() < 1e-12);
    assert_eq!(rec[3]["categories"], serde_json::json!(["blue", "green", "red"]));
    assert!(String::from_utf8(out.stdout).unwrap().contains("bernoulli"));
}

#[test]
fn analyze_shows_standardized_anchors_and_lip_target() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // exponential quantiles and symmetric values: the anchors hold up to the
    // mismatch between the moment fit and the sample spread
    let mut text = String::from("e,z\n");
    for i in 1..=200 {
        let u = (i as f64 - 0.5) / 200.0;
        let z = if i % 2 == 0 { u * 3.0 } else { -u * 3.0 };
        text.push_str(&format!("{},{}\n", -(1.0 - u).ln() / 4.0, z));
    }
    write(d, "in.csv", &text);
    write(d, "hints.json", r#"{"e": {"family": "exponential"}, "z": "real"}"#);
    let out = lipstd(&["analyze", "in.csv", "--hints", "hints.json", "--format", "json"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    let rows = report["columns"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    let row = |col: &str, method: &str| rows.iter().find(|r| r["column"] == col && r["method"] == method).unwrap();
    assert!((row("e", "std")["local_total"].as_f64().unwrap() - 1.0).abs() < 0.05);
    assert!((row("z", "std")["local_total"].as_f64().unwrap() - 3.0).abs() < 0.05);
    for col in ["e", "z"] {
        let r = row(col, "lip");
        assert!((r["total"].as_f64().unwrap() - r["target"].as_f64().unwrap()).abs() < 1e-6);
    }
    let table = lipstd(&["analyze", "in.csv", "--hints", "hints.json"], d);
    assert!(String::from_utf8(table.stdout).unwrap().lines().count() == 11);
}

#[test]
fn demo_is_deterministic_and_reports_every_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["demo", "--rows", "2000", "--iters", "3000", "--seed", "5", "--format", "json", "--trace-dir", "traces"];
    let a = lipstd(&args, d);
    let b = lipstd(&args, d);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report = json(&a.stdout);
    assert_eq!(report.as_array().unwrap().len(), 15);
    assert_eq!(std::fs::read_dir(d.join("traces")).unwrap().count(), 15);
    let trace = std::fs::read_to_string(d.join("traces/trace-lip-gamma.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3002);
    // the env seed is the default seed
    let env = Command::new(env!("CARGO_BIN_EXE_lipstd"))
        .args(["demo", "--rows", "2000", "--iters", "3000", "--format", "json"])
        .env("LIPSTD_SEED", "5")
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
}
