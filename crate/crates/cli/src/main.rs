//! `stabex`: JSON reports on stability, exact structures, the idempotent
//! completion and diagram categories over the built-in finite instances.
//!
//! Data goes to stdout (or `--out`), one-line summaries to stderr. Exit
//! status: 0 when every check in the report passes, 1 on a check failure or
//! a failed computation, 2 on a usage or parse error.

mod commands;
mod report;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use stabex_core::instances::InstanceSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Exact-structure axiom suite for one conflation class.
    Axioms,
    /// Stability verdict for every kernel-cokernel pair (JSONL corpus).
    Classify,
    /// Transfer agreement and essential-image census for the completion.
    Karoubi,
    /// Degreewise stability of cochain complexes against the base.
    Chain,
    /// Levelwise stability of truncated spectra against the base.
    Spectra,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassArg {
    Split,
    Stable,
    AllKcp,
}

#[derive(Debug, Parser)]
#[command(name = "stabex", version, about = "Stability and exact-structure checks on finite additive categories")]
struct Cli {
    command: Command,
    /// Instance descriptor: `zmod:<n>` or `pairs:<p>`.
    #[arg(long)]
    instance: String,
    /// Rank (or dimension, or total diagram size) bound for enumeration.
    #[arg(long)]
    bound: usize,
    /// Bound for universal-property oracles; defaults to `--bound`.
    #[arg(long)]
    oracle_bound: Option<usize>,
    /// Conflation class for `axioms`.
    #[arg(long, value_enum)]
    class: Option<ClassArg>,
    /// Number of degrees for `chain`.
    #[arg(long)]
    degrees: Option<usize>,
    /// Spectrum length for `spectra`.
    #[arg(long)]
    length: Option<usize>,
    /// Check a seeded sample of `k` pairs instead of all of them.
    #[arg(long, requires = "seed")]
    sample: Option<usize>,
    /// Seed for `--sample`.
    #[arg(long, requires = "sample")]
    seed: Option<u64>,
    /// Write the data here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything a report depends on, echoed into it.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub instance: String,
    pub bound: usize,
    pub oracle_bound: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<usize>,
    pub seed: u64,
}

/// What a command hands back: the bytes to write and a summary line.
pub struct Output {
    pub data: String,
    pub summary: String,
    pub passed: bool,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(String),
}

impl From<stabex_core::error::CategoryError> for Failure {
    fn from(e: stabex_core::error::CategoryError) -> Self {
        Failure::Run(e.to_string())
    }
}

fn configure(cli: &Cli) -> Result<(RunConfig, InstanceSpec), Failure> {
    let spec: InstanceSpec = cli.instance.parse().map_err(|e: stabex_core::instances::ParseError| {
        Failure::Usage(format!("invalid instance {:?} at position {}: {}", cli.instance, e.position, e.message))
    })?;
    let only = |set: bool, flag: &str, cmd: Command| {
        if set && cli.command != cmd {
            Err(Failure::Usage(format!("{flag} only applies to {cmd}")))
        } else {
            Ok(())
        }
    };
    only(cli.class.is_some(), "--class", Command::Axioms)?;
    only(cli.degrees.is_some(), "--degrees", Command::Chain)?;
    only(cli.length.is_some(), "--length", Command::Spectra)?;
    if cli.sample.is_some() && cli.command == Command::Axioms {
        return Err(Failure::Usage("--sample does not apply to axioms".into()));
    }
    let config = RunConfig {
        command: cli.command,
        instance: spec.to_string(),
        bound: cli.bound,
        oracle_bound: cli.oracle_bound.unwrap_or(cli.bound),
        class: match cli.command {
            Command::Axioms => Some(cli.class.unwrap_or(ClassArg::Stable)),
            _ => None,
        },
        degrees: match cli.command {
            Command::Chain => Some(cli.degrees.unwrap_or(2)),
            _ => None,
        },
        length: match cli.command {
            Command::Spectra => Some(cli.length.unwrap_or(2)),
            _ => None,
        },
        sample: cli.sample,
        seed: cli.seed.unwrap_or(0),
    };
    if config.degrees == Some(0) || config.length == Some(0) {
        return Err(Failure::Usage("diagram length must be at least 1".into()));
    }
    Ok((config, spec))
}

fn threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("STABEX_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("STABEX_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Run(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let (config, spec) = configure(cli)?;
    threads()?;
    let start = Instant::now();
    let out = commands::dispatch(&config, spec)?;
    match &cli.out {
        Some(path) => std::fs::write(path, &out.data)
            .map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.data.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Run(format!("stdout: {e}")))?;
        }
    }
    let verdict = if out.passed { "pass" } else { "FAIL" };
    eprintln!("{verdict}: {} ({:.2} s)", out.summary, start.elapsed().as_secs_f64());
    Ok(out.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
