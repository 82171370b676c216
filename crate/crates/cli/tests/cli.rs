//! End-to-end runs of the `santa` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn santa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_santa")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn generate(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut all = vec!["generate"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path_str(&path)]);
    let out = santa(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn solve(dir: &TempDir, inst: &Path, name: &str) -> PathBuf {
    let sol = dir.path().join(name);
    let report = dir.path().join(format!("{name}.report"));
    let out = santa(&["solve", path_str(inst), "--seed", "3", "--out", path_str(&sol), "--report", path_str(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    sol
}

fn read(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn write(path: &Path, v: &Value) {
    std::fs::write(path, serde_json::to_vec(v).unwrap()).unwrap();
}

#[test]
fn generation_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", &["santa-coverage", "--seed", "9"]);
    let b = generate(&dir, "b.json", &["santa-coverage", "--seed", "9"]);
    let c = generate(&dir, "c.json", &["santa-coverage", "--seed", "10"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn solve_then_verify_accepts_and_reproduces() {
    let dir = TempDir::new().unwrap();
    for (k, kind) in ["santa-linear", "hypergraph-grouped"].iter().enumerate() {
        let inst = generate(&dir, &format!("i{k}.json"), &[kind, "--seed", "4"]);
        let first = solve(&dir, &inst, &format!("s{k}.json"));
        let second = solve(&dir, &inst, &format!("t{k}.json"));
        assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
        let out = santa(&["verify", path_str(&inst), path_str(&first)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn verify_rejects_tampered_solutions() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir, "h.json", &["hypergraph-grouped", "--seed", "5"]);
    let sol = solve(&dir, &inst, "s.json");
    let good = read(&sol);

    // The same resource handed to two players.
    let mut dup = good.clone();
    let assigned = dup["assigned"].as_array_mut().unwrap();
    let taken = assigned.iter().find_map(|a| a.as_array().and_then(|a| a.first().cloned())).expect("some assigned resource");
    let other = assigned.iter().position(|a| !a.as_array().unwrap().contains(&taken)).expect("a second player");
    assigned[other].as_array_mut().unwrap().push(taken);
    let bad = dir.path().join("dup.json");
    write(&bad, &dup);
    let out = santa(&["verify", path_str(&inst), path_str(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("violation"));

    // An alpha so small that nobody's assignment is large enough.
    let mut tight = good.clone();
    tight["alpha"] = Value::String("1/1000".into());
    let bad = dir.path().join("alpha.json");
    write(&bad, &tight);
    assert_eq!(code(&santa(&["verify", path_str(&inst), path_str(&bad)])), 1);
}

#[test]
fn malformed_inputs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, b"{\"not\": \"an instance\"}").unwrap();
    assert_eq!(code(&santa(&["solve", path_str(&junk)])), 2);
    let inst = generate(&dir, "i.json", &["santa-linear", "--seed", "1"]);
    assert_eq!(code(&santa(&["verify", path_str(&inst), path_str(&junk)])), 2);
}

#[test]
fn oracle_answers_small_inputs_and_refuses_large_ones() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir, "small.json", &["santa-linear", "--players", "3", "--resources", "7", "--seed", "2"]);
    let opt = dir.path().join("opt.json");
    let out = santa(&["oracle", path_str(&inst), "--which", "santa-opt", "--out", path_str(&opt)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&santa(&["verify", path_str(&inst), path_str(&opt)])), 0);

    let big = generate(
        &dir,
        "big.json",
        &["santa-linear", "--players", "8", "--resources", "40", "--density", "1", "--seed", "2"],
    );
    assert_eq!(code(&santa(&["oracle", path_str(&big), "--which", "santa-opt"])), 3);
}
