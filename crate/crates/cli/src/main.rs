//! `discenv`: run JSON scenarios and reproduce acceptance criteria.
//!
//! Exit codes: 0 success, 1 criterion failure (`reproduce`) or output I/O
//! error, 2 validation error or unknown criterion, 3 numeric failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use discenv::acceptance::{run_criterion, CRITERIA};
use discenv::scenario::{Command, Scenario, ScenarioError};
use serde_json::json;

#[derive(Parser)]
#[command(name = "discenv", version, about = "Envelopes of disc functionals and extremal functions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for summary.json, error.json and CSV tables.
    #[arg(long, global = true, default_value = "discenv-out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Weighted Green functions of the disc.
    Green(RunArgs),
    /// One functional on one disc.
    Functional(RunArgs),
    /// Envelopes of a functional over a disc family.
    Envelope(RunArgs),
    /// The inequality chain between the Lelong-type envelopes.
    Chain(RunArgs),
    /// Extremal functions of open sets in C^n.
    Siciak(RunArgs),
    /// Extremal functions on curve models.
    SiciakVariety(RunArgs),
    /// The envelope gap at a locally reducible singular point.
    Counterexample(RunArgs),
    /// Roots of z^k = zeta(z) near boundary arcs.
    Lemma1(RunArgs),
    /// Run the pinned scenario of an acceptance criterion (A1..A10).
    Reproduce {
        /// Criterion id.
        id: String,
    },
}

fn expected(cmd: &Cmd) -> Option<(Command, &RunArgs)> {
    Some(match cmd {
        Cmd::Green(a) => (Command::Green, a),
        Cmd::Functional(a) => (Command::Functional, a),
        Cmd::Envelope(a) => (Command::Envelope, a),
        Cmd::Chain(a) => (Command::Chain, a),
        Cmd::Siciak(a) => (Command::Siciak, a),
        Cmd::SiciakVariety(a) => (Command::SiciakVariety, a),
        Cmd::Counterexample(a) => (Command::Counterexample, a),
        Cmd::Lemma1(a) => (Command::Lemma1, a),
        Cmd::Reproduce { .. } => return None,
    })
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    fs::write(dir.join(name), text).with_context(|| format!("writing {name}"))
}

fn load_scenario(cmd: Command, args: &RunArgs) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(&args.scenario)
        .map_err(|e| ScenarioError::Validation(format!("scenario: cannot read {}: {e}", args.scenario.display())))?;
    let mut s = Scenario::from_json(&text)?;
    if s.command() != cmd {
        return Err(ScenarioError::Validation(format!(
            "command: file holds `{}`, subcommand is `{}`",
            s.command().name(),
            cmd.name()
        )));
    }
    if let Some(seed) = args.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn run_scenario(cmd: Command, args: &RunArgs, out: &Path) -> anyhow::Result<ExitCode> {
    let result = load_scenario(cmd, args).and_then(|s| s.run());
    match result {
        Ok(outcome) => {
            let mut summary = outcome.summary();
            summary["status"] = json!("ok");
            write_json(out, "summary.json", &summary)?;
            for (name, text) in outcome.tables() {
                fs::write(out.join(&name), text).with_context(|| format!("writing {name}"))?;
            }
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            let err = json!({"kind": e.kind(), "message": e.to_string()});
            write_json(out, "error.json", &json!({ "error": err }))?;
            write_json(
                out,
                "summary.json",
                &json!({"version": discenv::scenario::SCHEMA_VERSION, "command": cmd.name(), "status": "error", "error": err}),
            )?;
            eprintln!("{}", serde_json::to_string(&json!({ "error": err }))?);
            Ok(ExitCode::from(match e {
                ScenarioError::Validation(_) => 2,
                ScenarioError::Numeric(_) => 3,
            }))
        }
    }
}

fn reproduce(id: &str, out: &Path) -> anyhow::Result<ExitCode> {
    if !CRITERIA.contains(&id) {
        let err = json!({"kind": "validation", "message": format!("unknown criterion `{id}`; expected one of {}", CRITERIA.join(", "))});
        write_json(out, "error.json", &json!({ "error": err }))?;
        eprintln!("{}", serde_json::to_string(&json!({ "error": err }))?);
        return Ok(ExitCode::from(2));
    }
    let report = run_criterion(id).map_err(|e| anyhow::anyhow!(e.to_string()))?;
    write_json(out, &format!("{id}.json"), &serde_json::to_value(&report)?)?;
    println!("{}", report.line());
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let run = || -> anyhow::Result<ExitCode> {
        fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
        match expected(&cli.command) {
            Some((cmd, args)) => run_scenario(cmd, args, &cli.out),
            None => {
                let Cmd::Reproduce { id } = &cli.command else { unreachable!() };
                reproduce(id, &cli.out)
            }
        }
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
