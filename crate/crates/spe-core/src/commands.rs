//! Subcommand implementations shared by the CLI binary.
//!
//! Each command resolves a config, runs the physics, and writes its data
//! files plus a `manifest.json` provenance record into the output
//! directory. Config problems map to exit code 2, runtime problems
//! (simulation or I/O) to exit code 3.

use crate::bell::{run_chsh_sweep_repeated, theory_s};
use crate::coherence::autocorrelation_curve;
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{
    render_autocorr_csv, render_sweep_csv, render_sweep_json, render_theory_csv, Manifest,
    TheoryRow, AUTOCORR_SCHEMA, SWEEP_SCHEMA, THEORY_SCHEMA,
};
use crate::rng::RngFactory;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Failure modes of a command, tagged with the process exit code they map
/// to.
#[derive(Debug, Error)]
pub enum CommandError {
    /// The configuration is unusable (exit code 2).
    #[error("config error: {0}")]
    Config(String),
    /// The simulation or an output write failed (exit code 3).
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Runtime(_) => 3,
        }
    }
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> CommandError {
        CommandError::Config(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> CommandError {
    CommandError::Runtime(e.to_string())
}

/// Paths written by a command, in write order.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
}

struct OutputSink {
    dir: PathBuf,
    prefix: String,
    written: Vec<PathBuf>,
}

impl OutputSink {
    fn new(cfg: &ExperimentConfig, out_override: Option<&Path>) -> Result<OutputSink, CommandError> {
        let dir = out_override
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
        std::fs::create_dir_all(&dir)
            .map_err(|e| CommandError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(OutputSink {
            dir,
            prefix: cfg.output.prefix.clone(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, suffix: &str, text: &str) -> Result<(), CommandError> {
        let path = self.dir.join(format!("{}_{suffix}", self.prefix));
        std::fs::write(&path, text)
            .map_err(|e| CommandError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    fn finish(mut self, manifest: &Manifest) -> Result<CommandOutput, CommandError> {
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, manifest.render())
            .map_err(|e| CommandError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(CommandOutput {
            files: self.written,
        })
    }
}

/// Writes the closed-form CHSH curves for the configured grid and state
/// model.
pub fn cmd_theory(
    cfg: &ExperimentConfig,
    out_override: Option<&Path>,
) -> Result<CommandOutput, CommandError> {
    let resolved = cfg.resolve()?;
    let rows: Vec<TheoryRow> = resolved
        .alphas
        .iter()
        .map(|&alpha| -> Result<TheoryRow, CommandError> {
            Ok(TheoryRow {
                theta_rad: alpha / 2.0,
                alpha_rad: alpha,
                s_ideal: theory_s(alpha, 0.0, 1.0).map_err(runtime)?,
                s_effective: theory_s(alpha, resolved.model.epsilon, resolved.model.eta)
                    .map_err(runtime)?,
                s_mixed: theory_s(alpha, 1.0, resolved.model.eta).map_err(runtime)?,
            })
        })
        .collect::<Result<_, _>>()?;
    let mut sink = OutputSink::new(cfg, out_override)?;
    sink.write("theory.csv", &render_theory_csv(&rows))?;
    let manifest = Manifest::new("theory", None, cfg)
        .with_file(format!("{}_theory.csv", cfg.output.prefix), THEORY_SCHEMA);
    sink.finish(&manifest)
}

/// Runs the Monte Carlo CHSH sweep and writes CSV + JSON results.
///
/// `workers` caps the rayon thread count (the result is byte-identical
/// either way; this only trades wall time for CPU).
pub fn cmd_simulate(
    cfg: &ExperimentConfig,
    seed_override: Option<u64>,
    out_override: Option<&Path>,
    workers: Option<usize>,
) -> Result<CommandOutput, CommandError> {
    let resolved = cfg.resolve()?;
    let seed = seed_override.or(resolved.seed).ok_or_else(|| {
        CommandError::Config("simulate needs a seed: set `seed` in the config or pass --seed".into())
    })?;
    let factory = RngFactory::new(seed);
    let run = || {
        run_chsh_sweep_repeated(
            &resolved.alphas,
            &resolved.model,
            resolved.estimator,
            &resolved.source,
            &resolved.detector,
            &factory,
            resolved.repeats,
        )
    };
    let outcome = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(runtime)?
            .install(run),
        None => run(),
    }
    .map_err(runtime)?;

    let mut sink = OutputSink::new(cfg, out_override)?;
    sink.write("sweep.csv", &render_sweep_csv(&outcome))?;
    sink.write("sweep.json", &render_sweep_json(&outcome))?;
    let manifest = Manifest::new("simulate", Some(seed), cfg)
        .with_file(format!("{}_sweep.csv", cfg.output.prefix), SWEEP_SCHEMA)
        .with_file(format!("{}_sweep.json", cfg.output.prefix), SWEEP_SCHEMA);
    sink.finish(&manifest)
}

/// Writes the field-autocorrelation scan of the configured spectral
/// profile.
pub fn cmd_autocorr(
    cfg: &ExperimentConfig,
    out_override: Option<&Path>,
) -> Result<CommandOutput, CommandError> {
    let resolved = cfg.resolve()?;
    let profile = resolved.profile.as_ref().ok_or_else(|| {
        CommandError::Config("autocorr needs source.profile to describe the spectrum".into())
    })?;
    let grid = resolved.autocorr_grid();
    let points = autocorrelation_curve(profile, &grid);
    let mut sink = OutputSink::new(cfg, out_override)?;
    sink.write("autocorr.csv", &render_autocorr_csv(&points))?;
    let manifest = Manifest::new("autocorr", None, cfg).with_file(
        format!("{}_autocorr.csv", cfg.output.prefix),
        AUTOCORR_SCHEMA,
    );
    sink.finish(&manifest)
}
