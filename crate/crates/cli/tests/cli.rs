use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pq-eigen"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, String) {
    let path = dir.join(name);
    let mut all = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--output", p]);
    let out = run(&all);
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    (out, text)
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("structured error on stderr")
}

#[test]
fn solve_writes_the_fixed_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (out, text) = run_to(dir.path(), "solve.json", &["--nodes", "60"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&text).unwrap();
    for key in ["lambda", "residual", "mu_trace", "energy_trace", "eigenfunction", "grid", "params", "config"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let mu: Vec<f64> = serde_json::from_value(v["mu_trace"].clone()).unwrap();
    assert!(mu.windows(2).all(|w| w[1] <= w[0] + 1e-10 * mu[0]));
    let norms: Vec<f64> = serde_json::from_value(v["lq_norm_trace"].clone()).unwrap();
    assert!(norms.iter().all(|n| (n - 1.0).abs() <= 1e-12));
    assert_eq!(v["eigenfunction"].as_array().unwrap().len(), 60);
    assert_eq!(v["config"]["nodes"], 60);

    // top-level keys appear sorted
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn sweep_rows_dominate_local_only() {
    let out = run(&["--mode", "sweep", "--sweep-p", "1.5,2,2.5", "--q", "2", "--s", "0.5", "--nodes", "50", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for (row, p) in rows.iter().zip([1.5, 2.0, 2.5]) {
        assert_eq!(row[col("p")].parse::<f64>().unwrap(), p);
        let lambda: f64 = row[col("lambda")].parse().unwrap();
        let local: f64 = row[col("local_lambda")].parse().unwrap();
        assert!(lambda >= local);
    }
    assert!(text.starts_with("# mode=sweep\n"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# quadratic run\np = 2\nq=2\nnodes = 30 # coarse\ntol=1e-9\n").unwrap();
    let (out, text) = run_to(dir.path(), "out.json", &["--config", cfg.to_str().unwrap(), "--nodes", "40"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config"]["nodes"], 40);
    assert_eq!(v["config"]["tol"], 1e-9);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "p=2\nthreads=4\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = error_json(&out)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("threads") && msg.contains(":2:"), "{msg}");
}

#[test]
fn usage_errors_name_the_problem() {
    let out = run(&["--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"]["kind"], "invalid_params");
    assert!(e["error"]["message"].as_str().unwrap().contains("p > 1"));

    let out = run(&["--local-only", "--nonlocal-only"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_json(&out)["error"]["message"].as_str().unwrap().contains("local-only"));
}

#[test]
fn computation_failures_are_structured() {
    let out = run(&["--nodes", "40", "--max-outer", "1", "--tol", "1e-12"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"]["kind"], "outer_max_iterations");
}

#[test]
fn diagnose_reports_everything() {
    let out = run(&["--mode", "diagnose", "--nodes", "60", "--p", "3"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["positivity"]["min"].as_f64().unwrap() > 0.0);
    assert!(v["level_sets"]["decay_exponent"].as_f64().unwrap() > 0.0);
    assert_eq!(v["inequalities"]["seed"], 42);
    assert!(v["linf"].as_f64().unwrap() > 0.0);
}

#[test]
fn oracle_picks_the_dense_solver_when_quadratic() {
    let out = run(&["--mode", "oracle", "--nodes", "40"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "dense_p2");
    let out = run(&["--mode", "oracle", "--nodes", "40", "--p", "3"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "projected_gradient");
}

#[test]
fn certify_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--mode", "certify", "--seed", "42", "--nodes", "50", "--p", "2.5", "--q", "1.5"];
    let (first, a) = run_to(dir.path(), "a.json", &args);
    let (second, b) = run_to(dir.path(), "b.json", &args);
    assert!(first.status.success() && second.status.success());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["failures"], 0);
}
