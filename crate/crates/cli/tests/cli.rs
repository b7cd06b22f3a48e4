use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const K3_MONODROMY: &str = r#"{"loops": [
  {"matrix": [[7, 9], [-4, -5]]}, {"matrix": [[1, 1], [0, 1]]}, {"matrix": [[1, 1], [0, 1]]},
  {"matrix": [[3, 1], [-4, -1]]}, {"matrix": [[3, 2], [-2, -1]]}, {"matrix": [[3, 2], [-2, -1]]},
  {"matrix": [[3, 2], [-2, -1]]}, {"matrix": [[3, 2], [-2, -1]]}, {"matrix": [[3, 1], [-4, -1]]},
  {"matrix": [[3, 2], [-2, -1]]}, {"matrix": [[3, 1], [-4, -1]]}, {"matrix": [[3, 1], [-4, -1]]},
  {"matrix": [[3, 2], [-2, -1]]}, {"matrix": [[3, 2], [-2, -1]]}, {"matrix": [[1, 1], [0, 1]]},
  {"matrix": [[3, 2], [-2, -1]]}
]}"#;

fn ellsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellsurf")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn monodromy_input_stops_after_homology() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "k3.json", K3_MONODROMY);
    let r = report(&ellsurf(&["analyze", &f]));
    assert_eq!(r["homology"]["rank"], 22);
    assert_eq!(r["homology"]["signature"], serde_json::json!([3, 19]));
    assert_eq!(r["homology"]["even"], true);
    assert_eq!(r["periods"], Value::Null);
    assert_eq!(r["skipped"].as_array().unwrap().len(), 2);
}

#[test]
fn rational_surface_homology_stage() {
    let dir = tempfile::tempdir().unwrap();
    let loops: Vec<String> = (0..6).map(|_| r#"{"matrix": [[1, 1], [0, 1]]}, {"matrix": [[1, 0], [-1, 1]]}"#.to_string()).collect();
    let f = write(dir.path(), "e8.json", &format!(r#"{{"loops": [{}]}}"#, loops.join(", ")));
    let r = report(&ellsurf(&["analyze", &f, "--stage", "homology"]));
    assert_eq!(r["homology"]["rank"], 10);
    assert_eq!(r["homology"]["determinant"], "-1");
    assert_eq!(r["neron_severi"], Value::Null);
}

#[test]
fn legendre_report_with_cache_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "legendre.txt", "Y^2 Z - X (X - Z) (X - t Z)");
    let cache = dir.path().join("cache");
    let out1 = dir.path().join("cold.json");
    let out2 = dir.path().join("warm.json");
    for out in [&out1, &out2] {
        let o = ellsurf(&["analyze", &f, "--digits", "40", "--cache", cache.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(std::fs::read_dir(&cache).unwrap().count() >= 2);
    let cold = std::fs::read(&out1).unwrap();
    assert_eq!(cold, std::fs::read(&out2).unwrap());
    let r: Value = serde_json::from_slice(&cold).unwrap();
    assert_eq!(r["neron_severi"]["rho"], 10);
    assert_eq!(r["neron_severi"]["mw"]["torsion"], serde_json::json!(["2", "2"]));
}

#[test]
fn input_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let hesse = write(dir.path(), "hesse.txt", "X³ + Y³ + Z³ − tXYZ");
    let o = ellsurf(&["analyze", &hesse]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[0:1:0]"));
    let quartic = write(dir.path(), "quartic.txt", "X⁴ − Y²Z²");
    assert_eq!(ellsurf(&["analyze", &quartic]).status.code(), Some(2));
    let legendre = write(dir.path(), "legendre.txt", "Y^2 Z - X (X - Z) (X - t Z)");
    assert_eq!(ellsurf(&["analyze", &legendre, "--digits", "10"]).status.code(), Some(2));
    let open = write(dir.path(), "open.json", r#"{"loops": [{"matrix": [[1, 1], [0, 1]]}]}"#);
    assert_eq!(ellsurf(&["analyze", &open]).status.code(), Some(2));
    assert_eq!(ellsurf(&["analyze", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(ellsurf(&["analyze", &legendre, "--stage", "bogus"]).status.code(), Some(2));
}

#[test]
fn monodromy_override_replaces_continuation() {
    let dir = tempfile::tempdir().unwrap();
    let legendre = write(dir.path(), "legendre.txt", "Y^2 Z - X (X - Z) (X - t Z)");
    let m = write(dir.path(), "m.json", r#"{"loops": [{"matrix": [[1, 2], [0, 1]]}, {"matrix": [[1, 0], [-2, 1]]}, {"matrix": [[-3, -2], [2, 1]]}]}"#);
    let r = report(&ellsurf(&["analyze", &legendre, "--monodromy-in", &m, "--digits", "30"]));
    assert_eq!(r["monodromy"]["source"], "input");
    assert_eq!(r["pencil"]["picard_fuchs"]["order"], 2);
    assert_eq!(r["neron_severi"]["rho"], 10);
}
