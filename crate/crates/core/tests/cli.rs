use std::path::Path;
use std::process::{Command, Output};

use disclib::cli::{emit_coo, run};
use disclib::SetSystemMatrix;
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disclib"))
        .args(args)
        .env_remove("DISCLIB_SEED")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn two_element_set_random_mode() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "a.sets", "1 2\n2 1 2\n");
    let out = bin(&["--input", &input, "--mode", "random", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let disc = r["discrepancy"].as_f64().unwrap();
    assert!(disc == 0.0 || disc == 2.0);
    assert_eq!(r["mode"], "random");
    assert_eq!(r["seed"], 3);
    assert_eq!(r["schema"], 1);
    let v: Vec<f64> = r["coloring"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(v.len(), 2);
    assert_eq!((v[0] + v[1]).abs(), disc);
}

#[test]
fn malformed_line_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.sets", "2 3\n1 1\n2 1 x\n");
    let out = bin(&["--input", &input]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("line 3"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_input_and_bad_config_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["--input", "/nonexistent/x.sets"]).status.code(), Some(1));
    let input = write(dir.path(), "a.sets", "1 2\n2 1 2\n");
    let config = write(dir.path(), "c.json", r#"{"no_such_field": 1}"#);
    assert_eq!(bin(&["--input", &input, "--config", &config]).status.code(), Some(1));
    assert_eq!(bin(&["--input", &input, "--mode", "fast"]).status.code(), Some(1));
}

#[test]
fn identity_coo_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "id.coo", &emit_coo(&SetSystemMatrix::identity(128)));
    let out = bin(&["--input", &input, "--format", "coo", "--verify", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["discrepancy"].as_f64().unwrap(), 1.0);
    assert!(r["discrepancy"].as_f64().unwrap() <= r["bound"].as_f64().unwrap());
}

#[test]
fn verify_fails_on_unreachable_bound() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "a.sets", "1 4\n4 1 2 3 4\n");
    let config = write(dir.path(), "c.json", r#"{"spencer_constant": 1e-9, "retry_count": 2}"#);
    let out = bin(&["--input", &input, "--config", &config, "--mode", "random"]);
    assert_eq!(out.status.code(), Some(2));
}

fn strip_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn reports_are_deterministic_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("48 48\n");
    for r in 0..48usize {
        let set: Vec<String> = (1..=48usize).filter(|c| (r * 7 + c * 13) % 5 < 2).map(|c| c.to_string()).collect();
        text.push_str(&format!("{} {}\n", set.len(), set.join(" ")));
    }
    let input = write(dir.path(), "a.sets", &text);
    let a = bin(&["--input", &input, "--seed", "11"]);
    let b = bin(&["--input", &input, "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(strip_timing(report(&a)), strip_timing(report(&b)));

    let env = Command::new(env!("CARGO_BIN_EXE_disclib"))
        .args(["--input", &input])
        .env("DISCLIB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(strip_timing(report(&a)), strip_timing(report(&env)));

    let config = write(dir.path(), "c.json", r#"{"seed": 11}"#);
    let from_config = bin(&["--input", &input, "--config", &config]);
    assert_eq!(strip_timing(report(&a)), strip_timing(report(&from_config)));
}

#[test]
fn stats_and_out_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "id.coo", &emit_coo(&SetSystemMatrix::identity(16)));
    let out_path = dir.path().join("r.json");
    let stats_path = dir.path().join("s.csv");
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = run(
        [
            "disclib",
            "--input",
            &input,
            "--format",
            "coo",
            "--out",
            out_path.to_str().unwrap(),
            "--stats",
            stats_path.to_str().unwrap(),
        ],
        &mut stdout,
        &mut stderr,
    );
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&stderr));
    assert!(stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    let csv = std::fs::read_to_string(stats_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("phase,n_sub,m_sub,nnz,disc_contrib,micros,retries"));
    assert_eq!(lines.count(), r["trace"].as_array().unwrap().len());
    assert_eq!(r["timing"]["phase_micros"].as_array().unwrap().len(), r["trace"].as_array().unwrap().len());
}
