//! Command line and config-file parsing into a validated [`RunConfig`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use pq_eigen::{Grid, Params, Terms};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Inverse iteration; writes the eigenpair and its trace.
    Solve,
    /// Independent oracle for the same discrete eigenvalue.
    Oracle,
    /// Eigenpair plus level-set, positivity and inequality reports.
    Diagnose,
    /// Eigenvalue over a (p, q, s) lattice.
    Sweep,
    /// Full invariant suite; exits nonzero on any violation.
    Certify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags override values read from `--config`; anything unset falls back to the defaults
/// shown here.
#[derive(Debug, Parser)]
#[command(name = "pq-eigen", version, about = "First eigenpair of the mixed local/nonlocal (p,q)-eigenvalue problem on an interval")]
pub struct Cli {
    /// Exponent of the operator, p > 1 [default: 2]
    #[arg(long)]
    pub p: Option<f64>,
    /// Exponent of the right-hand side, 1 < q < p* [default: 2]
    #[arg(long)]
    pub q: Option<f64>,
    /// Fractional order, 0 < s < 1 [default: 0.5]
    #[arg(long)]
    pub s: Option<f64>,
    /// Left endpoint [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Right endpoint [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Interior grid nodes M [default: 100]
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Stopping tolerance [default: 1e-8]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Outer iteration budget [default: 500]
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Seed for every random corpus [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// [default: solve]
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Drop the nonlocal part of the energy
    #[arg(long)]
    pub local_only: bool,
    /// Drop the local part of the energy
    #[arg(long)]
    pub nonlocal_only: bool,
    /// Output file [default: stdout]
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// [default: json]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// File of key=value lines using the flag names; `#` starts a comment
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated p values for sweep mode [default: --p]
    #[arg(long, value_delimiter = ',')]
    pub sweep_p: Option<Vec<f64>>,
    /// Comma-separated q values for sweep mode [default: --q]
    #[arg(long, value_delimiter = ',')]
    pub sweep_q: Option<Vec<f64>>,
    /// Comma-separated s values for sweep mode [default: --s]
    #[arg(long, value_delimiter = ',')]
    pub sweep_s: Option<Vec<f64>>,
}

/// Fully resolved configuration; embedded verbatim in every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub nodes: usize,
    pub tol: f64,
    pub max_outer: usize,
    pub seed: u64,
    pub local_only: bool,
    pub nonlocal_only: bool,
    /// Where the artifact goes, not what it contains, so it is left out of the embedded copy.
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub format: Format,
    pub sweep_p: Vec<f64>,
    pub sweep_q: Vec<f64>,
    pub sweep_s: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    File { path: PathBuf, line: usize, message: String },
    #[error("--{flag}: {message}")]
    Flag { flag: &'static str, message: String },
    #[error("{0}")]
    Core(#[from] pq_eigen::Error),
}

impl ConfigError {
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::Core(e) => e.kind(),
            _ => "usage",
        }
    }
}

const KEYS: [&str; 17] = [
    "p", "q", "s", "a", "b", "nodes", "tol", "max_outer", "seed", "mode", "local_only",
    "nonlocal_only", "output", "format", "sweep_p", "sweep_q", "sweep_s",
];

/// Reads `key=value` lines. Keys may use `-` or `_`; duplicates and unknown keys are errors.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    parse_config_text(&text, path)
}

pub fn parse_config_text(text: &str, path: &Path) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError::File { path: path.into(), line, message };
        let (key, value) = content.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{content}`")))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(err(format!("unknown key `{key}`")));
        }
        if out.insert(key.clone(), (line, value.trim().to_string())).is_some() {
            return Err(err(format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

fn parse_value<T: FromStr>(path: &Path, key: &str, line: usize, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::File {
        path: path.into(),
        line,
        message: format!("bad value `{value}` for `{key}`: {e}"),
    })
}

fn parse_list(path: &Path, key: &str, line: usize, value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|v| parse_value(path, key, line, v.trim())).collect()
}

fn parse_enum<T: ValueEnum>(path: &Path, key: &str, line: usize, value: &str) -> Result<T, ConfigError> {
    T::from_str(value, true).map_err(|e| ConfigError::File { path: path.into(), line, message: format!("bad value for `{key}`: {e}") })
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig {
            mode: Mode::Solve,
            p: 2.0,
            q: 2.0,
            s: 0.5,
            a: 0.0,
            b: 1.0,
            nodes: 100,
            tol: 1e-8,
            max_outer: 500,
            seed: 42,
            local_only: false,
            nonlocal_only: false,
            output: None,
            format: Format::Json,
            sweep_p: Vec::new(),
            sweep_q: Vec::new(),
            sweep_s: Vec::new(),
        };
        if let Some(path) = &cli.config {
            for (key, (line, value)) in read_config_file(path)? {
                let v = value.as_str();
                match key.as_str() {
                    "p" => cfg.p = parse_value(path, &key, line, v)?,
                    "q" => cfg.q = parse_value(path, &key, line, v)?,
                    "s" => cfg.s = parse_value(path, &key, line, v)?,
                    "a" => cfg.a = parse_value(path, &key, line, v)?,
                    "b" => cfg.b = parse_value(path, &key, line, v)?,
                    "nodes" => cfg.nodes = parse_value(path, &key, line, v)?,
                    "tol" => cfg.tol = parse_value(path, &key, line, v)?,
                    "max_outer" => cfg.max_outer = parse_value(path, &key, line, v)?,
                    "seed" => cfg.seed = parse_value(path, &key, line, v)?,
                    "mode" => cfg.mode = parse_enum(path, &key, line, v)?,
                    "local_only" => cfg.local_only = parse_value(path, &key, line, v)?,
                    "nonlocal_only" => cfg.nonlocal_only = parse_value(path, &key, line, v)?,
                    "output" => cfg.output = Some(PathBuf::from(v)),
                    "format" => cfg.format = parse_enum(path, &key, line, v)?,
                    "sweep_p" => cfg.sweep_p = parse_list(path, &key, line, v)?,
                    "sweep_q" => cfg.sweep_q = parse_list(path, &key, line, v)?,
                    "sweep_s" => cfg.sweep_s = parse_list(path, &key, line, v)?,
                    _ => unreachable!("keys are checked while reading"),
                }
            }
        }

        macro_rules! take {
            ($($field:ident),*) => { $(if let Some(v) = cli.$field { cfg.$field = v; })* };
        }
        take!(p, q, s, a, b, nodes, tol, max_outer, seed, mode, format, sweep_p, sweep_q, sweep_s);
        if cli.output.is_some() {
            cfg.output = cli.output;
        }
        cfg.local_only |= cli.local_only;
        cfg.nonlocal_only |= cli.nonlocal_only;

        for (axis, base) in [(&mut cfg.sweep_p, cfg.p), (&mut cfg.sweep_q, cfg.q), (&mut cfg.sweep_s, cfg.s)] {
            if axis.is_empty() {
                axis.push(base);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.local_only && self.nonlocal_only {
            return Err(ConfigError::Flag { flag: "nonlocal-only", message: "cannot be combined with --local-only".into() });
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(ConfigError::Flag { flag: "tol", message: format!("must be positive, got {}", self.tol) });
        }
        if self.max_outer == 0 {
            return Err(ConfigError::Flag { flag: "max-outer", message: "must be at least 1".into() });
        }
        if self.format == Format::Csv && !matches!(self.mode, Mode::Solve | Mode::Sweep) {
            return Err(ConfigError::Flag { flag: "format", message: "csv is only available for solve and sweep".into() });
        }
        self.params()?;
        self.grid()?;
        for &p in &self.sweep_p {
            for &q in &self.sweep_q {
                for &s in &self.sweep_s {
                    Params::new(p, q, s, 1)?;
                }
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> Terms {
        match (self.local_only, self.nonlocal_only) {
            (true, _) => Terms::LocalOnly,
            (_, true) => Terms::NonlocalOnly,
            _ => Terms::Mixed,
        }
    }

    pub fn params(&self) -> pq_eigen::Result<Params> {
        Ok(Params::new(self.p, self.q, self.s, 1)?.with_terms(self.terms()))
    }

    pub fn grid(&self) -> pq_eigen::Result<Grid> {
        Grid::new(self.a, self.b, self.nodes)
    }

    /// The configuration minus `output` as `key=value` lines, readable back through `--config`.
    pub fn to_lines(&self) -> Vec<String> {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        vec![
            format!("mode={}", value_name(self.mode)),
            format!("p={}", self.p),
            format!("q={}", self.q),
            format!("s={}", self.s),
            format!("a={}", self.a),
            format!("b={}", self.b),
            format!("nodes={}", self.nodes),
            format!("tol={}", self.tol),
            format!("max_outer={}", self.max_outer),
            format!("seed={}", self.seed),
            format!("local_only={}", self.local_only),
            format!("nonlocal_only={}", self.nonlocal_only),
            format!("format={}", value_name(self.format)),
            format!("sweep_p={}", list(&self.sweep_p)),
            format!("sweep_q={}", list(&self.sweep_q)),
            format!("sweep_s={}", list(&self.sweep_s)),
        ]
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}
