//! `spe` — single-photon entanglement bench simulator.
//!
//! Subcommands: `theory` (closed-form CHSH curves), `simulate` (Monte
//! Carlo sweep), `autocorr` (white-light fringe scan), `validate`
//! (built-in physics self-checks).
//!
//! Environment:
//! * `SPE_WORKERS` — cap the simulation thread count (results are
//!   byte-identical regardless).
//! * `SPE_INJECT_FAULT` — name of a self-check to deliberately break, for
//!   testing that `validate` detects violations.

use clap::{Args, Parser, Subcommand};
use spe_core::commands::{cmd_autocorr, cmd_simulate, cmd_theory, CommandError, CommandOutput};
use spe_core::config::{load_config, preset, ExperimentConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "spe", version, about = "Single-photon entanglement bench simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write closed-form CHSH curves for the configured state model.
    Theory(RunArgs),
    /// Run the Monte Carlo CHSH sweep and write counts and S estimates.
    Simulate(SimulateArgs),
    /// Write the field-autocorrelation scan of the configured spectrum.
    Autocorr(RunArgs),
    /// Run the built-in physics self-checks and print a pass/fail table.
    Validate,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; may set `"preset"` to start from a built-in.
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset: laser, led, halogen, incoherent, broadband_led.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory (default: the config's `output.dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// RNG seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig, CommandError> {
        match (&self.config, &self.preset) {
            (Some(path), None) => load_config(path).map_err(CommandError::from),
            (None, Some(name)) => preset(name).map_err(CommandError::from),
            (None, None) => Err(CommandError::Config(
                "pass --config FILE or --preset NAME".into(),
            )),
            (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
        }
    }
}

fn workers_from_env() -> Result<Option<usize>, CommandError> {
    match std::env::var("SPE_WORKERS") {
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| {
                CommandError::Config(format!("SPE_WORKERS must be a positive integer, got {v:?}"))
            })?;
            if n == 0 {
                return Err(CommandError::Config(
                    "SPE_WORKERS must be a positive integer".into(),
                ));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn announce(out: &CommandOutput) {
    for path in &out.files {
        println!("wrote {}", path.display());
    }
}

fn run(cli: Cli) -> Result<i32, CommandError> {
    match cli.command {
        Command::Theory(args) => {
            let cfg = args.load()?;
            announce(&cmd_theory(&cfg, args.out.as_deref())?);
            Ok(0)
        }
        Command::Simulate(args) => {
            let cfg = args.run.load()?;
            let workers = workers_from_env()?;
            announce(&cmd_simulate(
                &cfg,
                args.seed,
                args.run.out.as_deref(),
                workers,
            )?);
            Ok(0)
        }
        Command::Autocorr(args) => {
            let cfg = args.load()?;
            announce(&cmd_autocorr(&cfg, args.out.as_deref())?);
            Ok(0)
        }
        Command::Validate => {
            let fault = std::env::var("SPE_INJECT_FAULT").ok();
            let report = spe_core::validate::run_checks(fault.as_deref());
            print!("{}", report.render_table());
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
