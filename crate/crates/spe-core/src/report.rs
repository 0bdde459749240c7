//! Output rendering: versioned CSV tables, JSON dumps, and the run
//! manifest.
//!
//! Every CSV starts with a `# schema <name>` comment line followed by the
//! column header, so downstream tooling can refuse files it does not
//! understand. For a fixed config and seed the CSV and JSON bodies are
//! byte-identical between runs; the only run-dependent value (the
//! timestamp) lives in the manifest.

use crate::bell::SweepOutcome;
use crate::coherence::AutocorrPoint;
use crate::config::ExperimentConfig;
use serde::Serialize;
use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

/// Schema tag of the sweep table.
pub const SWEEP_SCHEMA: &str = "spe.sweep.v1";
/// Schema tag of the theory table.
pub const THEORY_SCHEMA: &str = "spe.theory.v1";
/// Schema tag of the autocorrelation table.
pub const AUTOCORR_SCHEMA: &str = "spe.autocorr.v1";

/// Column header of the sweep table: angles, the S estimate with its
/// standard error, the four setting correlations, then raw channel counts
/// per setting (`n_<setting>_<channel>`).
pub const SWEEP_CSV_HEADER: &str = "alpha_rad,theta_rad,s,s_err,\
e_ab,e_ab_prime,e_a_prime_b,e_a_prime_b_prime,\
n_ab_0v,n_ab_0h,n_ab_1v,n_ab_1h,\
n_ab_prime_0v,n_ab_prime_0h,n_ab_prime_1v,n_ab_prime_1h,\
n_a_prime_b_0v,n_a_prime_b_0h,n_a_prime_b_1v,n_a_prime_b_1h,\
n_a_prime_b_prime_0v,n_a_prime_b_prime_0h,n_a_prime_b_prime_1v,n_a_prime_b_prime_1h";

/// Column header of the theory table.
pub const THEORY_CSV_HEADER: &str = "theta_rad,alpha_rad,s_ideal,s_effective,s_mixed";

/// Column header of the autocorrelation table.
pub const AUTOCORR_CSV_HEADER: &str = "delta_l_m,probability";

/// One row of the closed-form theory table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryRow {
    pub theta_rad: f64,
    pub alpha_rad: f64,
    /// S of the ideal pure state (ε = 0, η = 1).
    pub s_ideal: f64,
    /// S of the configured state model (its ε and η).
    pub s_effective: f64,
    /// S of the fully dephased state at the configured η.
    pub s_mixed: f64,
}

fn push_schema_line(out: &mut String, schema: &str) {
    let _ = writeln!(out, "# schema {schema}");
}

/// Renders the sweep table.
pub fn render_sweep_csv(outcome: &SweepOutcome) -> String {
    let mut out = String::new();
    push_schema_line(&mut out, SWEEP_SCHEMA);
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in &outcome.points {
        let _ = write!(out, "{},{},{},{}", p.alpha, p.theta, p.s, p.s_err);
        for e in p.correlations {
            let _ = write!(out, ",{e}");
        }
        for counts in &p.counts {
            for n in counts.as_array() {
                let _ = write!(out, ",{n}");
            }
        }
        out.push('\n');
    }
    out
}

/// Renders the theory table.
pub fn render_theory_csv(rows: &[TheoryRow]) -> String {
    let mut out = String::new();
    push_schema_line(&mut out, THEORY_SCHEMA);
    out.push_str(THEORY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.theta_rad, r.alpha_rad, r.s_ideal, r.s_effective, r.s_mixed
        );
    }
    out
}

/// Renders the autocorrelation table.
pub fn render_autocorr_csv(points: &[AutocorrPoint]) -> String {
    let mut out = String::new();
    push_schema_line(&mut out, AUTOCORR_SCHEMA);
    out.push_str(AUTOCORR_CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{}", p.delta_l, p.probability);
    }
    out
}

/// Renders the sweep result as pretty JSON (same content as the CSV plus
/// detector tallies).
pub fn render_sweep_json(outcome: &SweepOutcome) -> String {
    let mut s = serde_json::to_string_pretty(outcome).expect("sweep serializes");
    s.push('\n');
    s
}

/// Provenance record written next to the data files.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub created_unix: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub files: Vec<ManifestFile>,
    pub config: ExperimentConfig,
}

/// A data file listed in the manifest, with its schema tag.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestFile {
    pub name: String,
    pub schema: &'static str,
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>, config: &ExperimentConfig) -> Manifest {
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Manifest {
            tool: "spe",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            created_unix,
            seed,
            files: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn with_file(mut self, name: impl Into<String>, schema: &'static str) -> Manifest {
        self.files.push(ManifestFile {
            name: name.into(),
            schema,
        });
        self
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
