mod certify;
mod config;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::{Cli, RunConfig};

// 0 success, 1 certify violation, 2 bad configuration, 3 computation or I/O failure
fn main() -> ExitCode {
    let cfg = match RunConfig::from_cli(Cli::parse()) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e.kind(), &e.to_string(), 2),
    };
    let artifact = match run::run(&cfg) {
        Ok(a) => a,
        Err(e) => return fail(e.kind(), &e.to_string(), 3),
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &artifact.text),
        None => std::io::stdout().write_all(artifact.text.as_bytes()),
    };
    if let Err(e) = written {
        return fail("io", &e.to_string(), 3);
    }
    if artifact.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let body = json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{}", serde_json::to_string_pretty(&body).expect("plain json"));
    ExitCode::from(code)
}
