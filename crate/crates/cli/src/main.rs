use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sectorctl::report::{to_json, Format};
use sectorctl::scenario::{load_scenario, run_scenario_timed, Scenario};
use sectorctl::{registry, Error, Report};

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Controllability checks for finite-dimensional quantum systems.
#[derive(Parser)]
#[command(name = "sectorctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in scenario.
    Run {
        /// Path to a scenario JSON file.
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        file: Option<PathBuf>,
        /// Name of a built-in scenario (see `list`).
        #[arg(long)]
        builtin: Option<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List the built-in scenarios.
    List,
    /// Run every built-in scenario and print one line per scenario.
    Suite {
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    #[arg(long, value_enum, default_value = "json")]
    format: OutFormat,
    /// Override the scenario tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock timings (makes output non-deterministic).
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Text,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Text => Format::Text,
        }
    }
}

fn apply(mut s: Scenario, opts: &RunOpts) -> Result<Scenario, Error> {
    if let Some(t) = opts.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidInput("--tol must be positive and finite".into()));
        }
        s.tol = t;
    }
    if let Some(seed) = opts.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn write_out(text: &str, out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn error_code(e: &Error) -> u8 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

fn run_one(s: Scenario, opts: &RunOpts) -> Result<Report, Error> {
    let s = apply(s, opts)?;
    run_scenario_timed(&s, opts.timings)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for name in registry::builtin_names() {
                let kind = registry::builtin(name).map(|s| s.kind.as_str()).unwrap_or("?");
                println!("{name:<22} {kind}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { file, builtin, opts } => {
            let loaded = match (&file, &builtin) {
                (Some(path), _) => load_scenario(path),
                (None, Some(name)) => registry::builtin(name),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let result = loaded.and_then(|s| run_one(s, &opts)).and_then(|r| {
                write_out(&r.emit(opts.format.into()), &opts.out)?;
                Ok(r)
            });
            match result {
                Ok(r) if r.pass() => ExitCode::SUCCESS,
                Ok(r) => {
                    eprintln!("failed verdicts: {}", r.failed_verdicts().join(", "));
                    ExitCode::from(EXIT_FAIL)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(error_code(&e))
                }
            }
        }
        Command::Suite { opts } => {
            let mut worst = 0u8;
            let mut reports = Vec::new();
            let mut lines = String::new();
            for name in registry::builtin_names() {
                match registry::builtin(name).and_then(|s| run_one(s, &opts)) {
                    Ok(r) => {
                        let status = if r.pass() { "PASS" } else { "FAIL" };
                        lines.push_str(&format!("{status} {name}\n"));
                        if !r.pass() {
                            worst = worst.max(EXIT_FAIL);
                        }
                        reports.push(r.to_value());
                    }
                    Err(e) => {
                        lines.push_str(&format!("ERROR {name}: {e}\n"));
                        worst = worst.max(error_code(&e));
                    }
                }
            }
            let text = match Format::from(opts.format) {
                Format::Text => lines,
                Format::Json => to_json(&serde_json::Value::Array(reports)),
            };
            if let Err(e) = write_out(&text, &opts.out) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            ExitCode::from(worst)
        }
    }
}
