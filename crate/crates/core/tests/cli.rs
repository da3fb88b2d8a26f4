use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_fixpoint-lab");

fn run(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut c = Command::new(BIN);
    c.args(args).env_remove("FIXPOINT_LAB_SEED");
    if let Some(s) = env_seed {
        c.env("FIXPOINT_LAB_SEED", s);
    }
    c.output().expect("binary runs")
}

fn conf(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_constant_kannan_zero() {
    let d = tempfile::tempdir().unwrap();
    let c = conf(d.path(), "c.conf", "map = constant_0.3\nconditions = kannan\nlambda = 0\nsamples = 2000\n");
    let out = run(&["check", "--config", s(&c)], None);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["command"], "check");
    assert_eq!(v["checks"][0]["condition_id"], "kannan");
}

#[test]
fn check_generalized_flagship_embedded() {
    let d = tempfile::tempdir().unwrap();
    let c = conf(
        d.path(),
        "c.conf",
        "map = piecewise_kannan\nconditions = generalized\nparams = embedded\nsamples = 2000\n",
    );
    let out = run(&["check", "--config", s(&c)], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_writes_csv_and_report() {
    let d = tempfile::tempdir().unwrap();
    let csv = d.path().join("traj.csv");
    let rep = d.path().join("rep.json");
    let c = conf(
        d.path(),
        "c.conf",
        &format!("map = piecewise_kannan\nstart = 1\nsamples = 2000\ntrajectory_out = {}\n", s(&csv)),
    );
    let out = run(&["solve", "--config", s(&c), "--out", s(&rep)], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v = json(&rep);
    assert_eq!(v["solves"].as_array().unwrap().len(), 10);
    assert_eq!(v["solves"][0]["steps"], 21);
    for r in v["solves"].as_array().unwrap() {
        assert!(r["fixed_point"][0].as_f64().unwrap().abs() < 1e-8);
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 23);
    assert!(text.starts_with("n,x_n,c_n,d_n,envelope_n\n"));
}

#[test]
fn solve_constant_one_step() {
    let d = tempfile::tempdir().unwrap();
    let c = conf(d.path(), "c.conf", "map = constant_0.3\nstarts = 3\nsamples = 1000\n");
    let out = run(&["solve", "--config", s(&c)], None);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["solves"][0]["fixed_point"], serde_json::json!([0.3]));
}

#[test]
fn solve_budget_exhaustion_is_a_failure() {
    let d = tempfile::tempdir().unwrap();
    let c = conf(d.path(), "c.conf", "map = half_scaling\nmax_steps = 5\nsamples = 1000\n");
    let out = run(&["solve", "--config", s(&c)], None);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let reasons: Vec<&Value> = v["solves"].as_array().unwrap().iter().map(|r| &r["stop_reason"]).collect();
    assert_eq!(reasons[0], "converged");
    assert!(reasons[1..].iter().all(|r| *r == "max_steps"));
}

#[test]
fn suite_on_neither_maps_matches_expectations() {
    let d = tempfile::tempdir().unwrap();
    let c = conf(d.path(), "c.conf", "catalog = status:neither\nsamples = 2000\n");
    let out = run(&["suite", "--config", s(&c)], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let kannan: Vec<&Value> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["condition_id"] == "kannan" && r["subject"] != "control:half_scaling")
        .collect();
    assert_eq!(kannan.len(), 2);
    assert!(kannan.iter().all(|r| r["pass"] == false && r["matched"] == true));
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    for text in ["map = nope\n", "grid = 1\n", "wobble = 3\n"] {
        let c = conf(d.path(), "bad.conf", text);
        assert_eq!(run(&["check", "--config", s(&c)], None).status.code(), Some(2), "{text}");
    }
    assert_eq!(run(&["check"], None).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(run(&["check", "--config", "/nonexistent.conf"], None).status.code(), Some(2));
}

#[test]
fn include_extends_catalog() {
    let d = tempfile::tempdir().unwrap();
    conf(
        d.path(),
        "maps.conf",
        "map.tilted.family = affine\nmap.tilted.slope = 0.3\nmap.tilted.intercept = 0.1\nmap.tilted.status = kannan, banach, generalized_b\n",
    );
    let c = conf(d.path(), "main.conf", "include = maps.conf\nmap = tilted\nconditions = fit, kannan\nsamples = 1000\n");
    let out = run(&["check", "--config", s(&c)], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["fits"][0]["kannan_matched"], true);
}

#[test]
fn seed_precedence_flag_over_env() {
    let d = tempfile::tempdir().unwrap();
    let c = conf(d.path(), "c.conf", "map = constant_0.3\nconditions = kannan\nsamples = 100\n");
    let seed = |out: Output| -> String {
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["config"]["seed"].as_str().unwrap().to_string()
    };
    assert_eq!(seed(run(&["check", "--config", s(&c)], Some("77"))), "77");
    assert_eq!(seed(run(&["check", "--config", s(&c), "--seed", "5"], Some("77"))), "5");
}

#[test]
fn output_path_does_not_leak_into_report() {
    let d = tempfile::tempdir().unwrap();
    let c = conf(d.path(), "c.conf", "map = identity\nconditions = metric, closure\nsamples = 200\n");
    let a = d.path().join("a.json");
    let b = d.path().join("sub_b.json");
    run(&["check", "--config", s(&c), "--out", s(&a)], None);
    run(&["check", "--config", s(&c), "--out", s(&b)], None);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
