//! The five run modes. Each returns the artifact as text plus whether it certifies.

use pq_eigen::diagnostics::{central_half, default_thresholds};
use pq_eigen::{
    coordinate_search_min, dense_p2_eigen, eigen_residual, inequality_report, inverse_iteration,
    level_set_report, linf_norm, positivity_check, projected_gradient_min, EigenPair, Grid,
    GridFunction, OracleResult, Params, Terms,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::certify;
use crate::config::{Format, Mode, RunConfig};

/// Corpus size used by the inequality report in diagnose and certify runs.
pub const CORPUS_SIZE: usize = 1000;

pub struct Artifact {
    pub text: String,
    /// False only when certify found a violation.
    pub passed: bool,
}

pub fn run(cfg: &RunConfig) -> pq_eigen::Result<Artifact> {
    let (text, passed) = match cfg.mode {
        Mode::Solve => (solve(cfg)?, true),
        Mode::Oracle => (oracle(cfg)?, true),
        Mode::Diagnose => (diagnose(cfg)?, true),
        Mode::Sweep => (sweep(cfg)?, true),
        Mode::Certify => {
            let report = certify::certify(cfg)?;
            let passed = report.passed;
            (pretty(envelope(cfg, json!(report))?), passed)
        }
    };
    Ok(Artifact { text, passed })
}

pub fn eigenpair(params: &Params, grid: Grid, cfg: &RunConfig) -> pq_eigen::Result<EigenPair> {
    inverse_iteration(params, &GridFunction::constant(grid, 1.0), cfg.tol, cfg.max_outer)
}

/// Dense spectrum when quadratic, exhaustive search on tiny grids, projected gradient
/// otherwise.
pub fn best_oracle(params: &Params, grid: &Grid) -> pq_eigen::Result<OracleResult> {
    if params.p == 2.0 && params.q == 2.0 {
        dense_p2_eigen(grid, params)
    } else if grid.m <= 6 {
        coordinate_search_min(params, grid)
    } else {
        projected_gradient_min(params, grid, 3)
    }
}

pub fn pretty(value: Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("values are always serializable");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data")
}

fn grid_json(g: &Grid) -> Value {
    json!({ "a": g.a, "b": g.b, "nodes": g.m, "h": g.h, "x": g.nodes() })
}

/// Merges `body` with the config, grid and params every artifact carries.
pub fn envelope(cfg: &RunConfig, body: Value) -> pq_eigen::Result<Value> {
    let mut out = json!({
        "config": to_value(cfg),
        "grid": grid_json(&cfg.grid()?),
        "params": to_value(&cfg.params()?),
    });
    if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
        o.extend(b);
    }
    Ok(out)
}

fn pair_json(pair: &EigenPair) -> Value {
    json!({
        "lambda": pair.lambda,
        "residual": pair.residual,
        "mu_trace": pair.trace.mu,
        "energy_trace": pair.trace.x_energy_next,
        "lq_norm_trace": pair.trace.lq_norms,
        "inner_iterations": pair.trace.inner_iterations,
        "eigenfunction": pair.w.values,
    })
}

fn solve(cfg: &RunConfig) -> pq_eigen::Result<String> {
    let pair = eigenpair(&cfg.params()?, cfg.grid()?, cfg)?;
    match cfg.format {
        Format::Json => Ok(pretty(envelope(cfg, pair_json(&pair))?)),
        Format::Csv => {
            let mut head = comment_header(cfg);
            head.push_str(&format!("# lambda={}\n# residual={}\n", pair.lambda, pair.residual));
            let mut w = csv::Writer::from_writer(head.into_bytes());
            w.write_record(["i", "x", "w"]).map_err(csv_error)?;
            for (i, (x, v)) in pair.w.grid.nodes().iter().zip(&pair.w.values).enumerate() {
                w.serialize((i + 1, x, v)).map_err(csv_error)?;
            }
            finish_csv(w)
        }
    }
}

fn oracle(cfg: &RunConfig) -> pq_eigen::Result<String> {
    let (params, grid) = (cfg.params()?, cfg.grid()?);
    let res = best_oracle(&params, &grid)?;
    let residual = eigen_residual(res.lambda, &res.minimizer, &params)?;
    Ok(pretty(envelope(
        cfg,
        json!({
            "lambda": res.lambda,
            "method": res.method,
            "residual": residual,
            "eigenfunction": res.minimizer.values,
        }),
    )?))
}

fn diagnose(cfg: &RunConfig) -> pq_eigen::Result<String> {
    let (params, grid) = (cfg.params()?, cfg.grid()?);
    let pair = eigenpair(&params, grid, cfg)?;
    let levels = level_set_report(&pair.w, &default_thresholds(&pair.w))?;
    let (lo, hi) = central_half(&grid);
    let min = positivity_check(&pair.w, lo, hi)?;
    let ineq = inequality_report(CORPUS_SIZE, cfg.seed, &params, &grid)?;
    let mut body = pair_json(&pair);
    if let Value::Object(o) = &mut body {
        o.insert("linf".into(), json!(linf_norm(&pair.w)));
        o.insert("level_sets".into(), to_value(&levels));
        o.insert("positivity".into(), json!({ "interval": [lo, hi], "min": min }));
        o.insert("inequalities".into(), to_value(&ineq));
    }
    Ok(pretty(envelope(cfg, body)?))
}

#[derive(Debug, Serialize)]
struct SweepRow {
    p: f64,
    q: f64,
    s: f64,
    lambda: f64,
    residual: f64,
    outer_steps: usize,
    /// First eigenvalue of the local part alone; the mixed value never falls below it.
    local_lambda: f64,
}

/// Rows in lattice order p, then q, then s.
fn sweep(cfg: &RunConfig) -> pq_eigen::Result<String> {
    let grid = cfg.grid()?;
    let mut rows = Vec::new();
    for &p in &cfg.sweep_p {
        for &q in &cfg.sweep_q {
            for &s in &cfg.sweep_s {
                let params = Params::new(p, q, s, 1)?.with_terms(cfg.terms());
                let pair = eigenpair(&params, grid, cfg)?;
                let local = eigenpair(&params.with_terms(Terms::LocalOnly), grid, cfg)?;
                rows.push(SweepRow {
                    p,
                    q,
                    s,
                    lambda: pair.lambda,
                    residual: pair.residual,
                    outer_steps: pair.trace.len(),
                    local_lambda: local.lambda,
                });
            }
        }
    }
    match cfg.format {
        Format::Json => Ok(pretty(envelope(cfg, json!({ "rows": rows }))?)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(comment_header(cfg).into_bytes());
            for row in &rows {
                w.serialize(row).map_err(csv_error)?;
            }
            finish_csv(w)
        }
    }
}

/// The resolved config as `#`-prefixed lines, so a CSV file still records how it was made.
fn comment_header(cfg: &RunConfig) -> String {
    cfg.to_lines().iter().map(|l| format!("# {l}\n")).collect()
}

fn csv_error(e: csv::Error) -> pq_eigen::Error {
    pq_eigen::Error::InvalidArgument(format!("csv output: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> pq_eigen::Result<String> {
    let bytes = w.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
