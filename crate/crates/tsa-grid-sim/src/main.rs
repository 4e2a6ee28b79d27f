//! Command-line front end: one subcommand per scenario kind plus
//! `validate`, thin shells around [`tsa_grid_core::harness`].
//!
//! Exit codes: 0 on success, 2 when the config (or an override) is invalid,
//! 3 when a validated scenario fails at runtime (convergence, degeneracy,
//! I/O). Failures print a single machine-readable JSON record to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tsa_grid_core::harness::{parse_config, run_to_dir, ScenarioConfig, ScenarioKind};
use tsa_grid_core::{Error, Result};

/// Environment variable consulted for the output directory when neither
/// `--out` nor the config names one.
const OUT_DIR_ENV: &str = "TSA_GRID_OUT";

#[derive(Parser)]
#[command(name = "tsa-grid-sim", version, about = "Quantify time-stamp attacks on synchrophasor applications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep clock offsets through the two-terminal fault locator.
    Fault(RunArgs),
    /// Sweep clock offsets through the voltage-stability margin monitor.
    Voltage(RunArgs),
    /// Sweep stamp forgeries through the wide-area event locator.
    Event(RunArgs),
    /// Sweep counterfeit power ratios through the GPS spoof-capture model.
    Gps(RunArgs),
    /// Parse and validate a config without running anything.
    Validate {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config and $TSA_GRID_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's sweep values, comma separated.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            let record = serde_json::json!({
                "error": { "kind": err.kind(), "message": err.to_string() }
            });
            eprintln!("{record}");
            ExitCode::from(if err.is_config() { 2 } else { 3 })
        }
    }
}

fn dispatch(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Fault(args) => run(ScenarioKind::Fault, args),
        Command::Voltage(args) => run(ScenarioKind::Voltage, args),
        Command::Event(args) => run(ScenarioKind::Event, args),
        Command::Gps(args) => run(ScenarioKind::Gps, args),
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            Ok(format!(
                "ok: {} scenario, seed {}, {} sweep point(s)",
                cfg.kind.as_str(),
                cfg.seed,
                cfg.sweep.len()
            ))
        }
    }
}

fn run(kind: ScenarioKind, args: RunArgs) -> Result<String> {
    let mut cfg = load_config(&args.config)?;
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "config declares kind \"{}\" but the {} subcommand was invoked",
            cfg.kind.as_str(),
            kind.as_str()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(sweep) = args.sweep {
        cfg.sweep = sweep;
        cfg.validate()?;
    }
    let out_dir = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = run_to_dir(&cfg, &out_dir)?;
    Ok(format!(
        "wrote {} file(s) to {}: {} scenario, seed {}, {} sweep point(s), {:.3} s",
        report.files.len(),
        out_dir.display(),
        cfg.kind.as_str(),
        cfg.seed,
        cfg.sweep.len(),
        report.wall_time_s
    ))
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}
