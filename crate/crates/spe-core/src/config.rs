//! Experiment configuration: JSON schema, named presets, and resolution of
//! a raw config into validated simulation objects.
//!
//! A config file is a JSON object with `source`, `geometry`, `detector`,
//! `model`, `sweep` and optional `autocorr`, `seed`, `output` sections. It
//! may name a `preset` to start from; any other fields given in the file
//! are deep-merged over the preset's values, so a file like
//!
//! ```json
//! { "preset": "laser", "seed": 7, "sweep": { "photons_per_setting": 20000 } }
//! ```
//!
//! runs the laser bench with a smaller photon budget.

use crate::bell::{EstimatorMode, StateModel};
use crate::coherence::SpectralProfile;
use crate::constants::SPEED_OF_LIGHT;
use crate::detector::{
    DetectorConfig, DEFAULT_COINCIDENCE_WINDOW, DEFAULT_DARK_RATE, DEFAULT_DEAD_TIME,
    DEFAULT_EFFICIENCY,
};
use crate::photostats::{thermal_occupancy, PhotonNumberLaw, SourceConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Errors from reading, parsing, or resolving a configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown preset {0:?}; available: laser, led, halogen, incoherent, broadband_led")]
    UnknownPreset(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// A scalar applied to all four channels, or four per-channel values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerChannel {
    Uniform(f64),
    Each([f64; 4]),
}

impl PerChannel {
    pub fn as_array(self) -> [f64; 4] {
        match self {
            PerChannel::Uniform(v) => [v; 4],
            PerChannel::Each(a) => a,
        }
    }
}

/// Photon-number law as written in config files; thermal occupancy may be
/// given directly or derived from a blackbody temperature at the profile's
/// center frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Poissonian { mean: f64 },
    Thermal { occupancy: f64 },
    ThermalFromTemperature { temperature_k: f64 },
    Fock { n: u32 },
}

/// Spectral profile as written in config files: either fitted parameters
/// (`omega0_rad_per_s` + `sigma_omega_rad_per_s`) or a filter description
/// (`center_wavelength_m` + `bandwidth_m`), plus an optional fringe
/// amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0_rad_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_omega_rad_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_wavelength_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

impl ProfileSpec {
    fn resolve(&self) -> Result<SpectralProfile, ConfigError> {
        let direct = (self.omega0_rad_per_s, self.sigma_omega_rad_per_s);
        let filter = (self.center_wavelength_m, self.bandwidth_m);
        let profile = match (direct, filter) {
            ((Some(w0), Some(sw)), (None, None)) => SpectralProfile::with_amplitude(
                w0,
                sw,
                self.amplitude.unwrap_or(1.0),
            ),
            ((None, None), (Some(lam), Some(dl))) => {
                SpectralProfile::from_filter(lam, dl).and_then(|p| {
                    SpectralProfile::with_amplitude(
                        p.omega0(),
                        p.sigma_omega(),
                        self.amplitude.unwrap_or(1.0),
                    )
                })
            }
            ((None, None), (None, None)) => {
                return invalid("profile: give omega0/sigma_omega or wavelength/bandwidth")
            }
            _ => {
                return invalid(
                    "profile: give either omega0_rad_per_s + sigma_omega_rad_per_s or \
                     center_wavelength_m + bandwidth_m, not a mixture",
                )
            }
        };
        profile.map_err(|e| ConfigError::Invalid(format!("profile: {e}")))
    }
}

/// `source` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub law: LawSpec,
    pub rate_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
}

/// `geometry` section: interferometer imbalance (as a path difference or a
/// time delay, not both) and residual generation phase.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_l_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_s: Option<f64>,
    #[serde(default)]
    pub xi_rad: f64,
}

/// `detector` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    #[serde(default = "default_efficiency")]
    pub efficiency: PerChannel,
    #[serde(default = "default_dark_rate")]
    pub dark_rate_hz: PerChannel,
    #[serde(default = "default_dead_time")]
    pub dead_time_s: f64,
    #[serde(default = "default_window")]
    pub coincidence_window_s: f64,
    /// Acquisition time per setting; when absent it is derived as
    /// `sweep.photons_per_setting / source.rate_hz`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    /// Lower all efficiencies to the worst channel before simulating.
    #[serde(default)]
    pub equalize_efficiencies: bool,
}

fn default_efficiency() -> PerChannel {
    PerChannel::Uniform(DEFAULT_EFFICIENCY)
}
fn default_dark_rate() -> PerChannel {
    PerChannel::Uniform(DEFAULT_DARK_RATE)
}
fn default_dead_time() -> f64 {
    DEFAULT_DEAD_TIME
}
fn default_window() -> f64 {
    DEFAULT_COINCIDENCE_WINDOW
}

impl Default for DetectorSpec {
    fn default() -> Self {
        DetectorSpec {
            efficiency: default_efficiency(),
            dark_rate_hz: default_dark_rate(),
            dead_time_s: default_dead_time(),
            coincidence_window_s: default_window(),
            duration_s: None,
            equalize_efficiencies: false,
        }
    }
}

/// `model` section: state-quality scale η fitted to measured fringe
/// contrast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "default_eta")]
    pub eta: f64,
}

fn default_eta() -> f64 {
    1.0
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec { eta: default_eta() }
    }
}

/// Which angle the sweep grid is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridParameter {
    /// CHSH Bloch parameter α.
    Alpha,
    /// Half-wave-plate rotation θ = α/2.
    Theta,
}

/// Evenly spaced sweep grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub parameter: GridParameter,
    pub start_rad: f64,
    pub stop_rad: f64,
    pub points: usize,
}

impl GridSpec {
    /// The α values of the grid (θ grids are doubled).
    pub fn alphas(&self) -> Result<Vec<f64>, ConfigError> {
        if !self.start_rad.is_finite() || !self.stop_rad.is_finite() {
            return invalid("sweep.grid: start/stop must be finite");
        }
        if self.points == 0 {
            return invalid("sweep.grid: need at least 1 point");
        }
        let scale = match self.parameter {
            GridParameter::Alpha => 1.0,
            GridParameter::Theta => 2.0,
        };
        let n = self.points;
        Ok((0..n)
            .map(|i| {
                let t = if n == 1 {
                    0.0
                } else {
                    i as f64 / (n - 1) as f64
                };
                scale * (self.start_rad + t * (self.stop_rad - self.start_rad))
            })
            .collect())
    }
}

/// `sweep` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub grid: GridSpec,
    /// Photon budget of one acquisition at one (point, setting).
    pub photons_per_setting: u64,
    /// Acquisitions pooled per point — the bench protocol of reporting
    /// the average of several measurements. Presets use 10.
    #[serde(default = "default_repeats")]
    pub repeats: u64,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorMode,
}

fn default_estimator() -> EstimatorMode {
    EstimatorMode::FourChannel
}
fn default_repeats() -> u64 {
    1
}

/// `autocorr` section: the ΔL scan of the white-light interferogram.
/// Defaults mirror a 20 μm piezo scan starting at the balanced point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutocorrSpec {
    #[serde(default)]
    pub start_m: f64,
    #[serde(default = "default_autocorr_stop")]
    pub stop_m: f64,
    #[serde(default = "default_autocorr_points")]
    pub points: usize,
}

fn default_autocorr_stop() -> f64 {
    20e-6
}
fn default_autocorr_points() -> usize {
    2001
}

impl Default for AutocorrSpec {
    fn default() -> Self {
        AutocorrSpec {
            start_m: 0.0,
            stop_m: default_autocorr_stop(),
            points: default_autocorr_points(),
        }
    }
}

/// `output` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

fn default_out_dir() -> String {
    "out".to_string()
}
fn default_prefix() -> String {
    "spe".to_string()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_out_dir(),
            prefix: default_prefix(),
        }
    }
}

/// A full experiment description as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: SourceSpec,
    #[serde(default)]
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub detector: DetectorSpec,
    #[serde(default)]
    pub model: ModelSpec,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub autocorr: AutocorrSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Everything needed to run commands, validated and in simulation units.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub model: StateModel,
    pub profile: Option<SpectralProfile>,
    pub source: SourceConfig,
    pub detector: DetectorConfig,
    pub alphas: Vec<f64>,
    pub estimator: EstimatorMode,
    pub photons_per_setting: u64,
    pub repeats: u64,
    pub seed: Option<u64>,
    pub autocorr: AutocorrSpec,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Validates the config and converts it into simulation objects.
    pub fn resolve(&self) -> Result<ResolvedExperiment, ConfigError> {
        let profile = match &self.source.profile {
            Some(spec) => Some(spec.resolve()?),
            None => None,
        };

        let law = match self.source.law {
            LawSpec::Poissonian { mean } => PhotonNumberLaw::Poissonian { mean },
            LawSpec::Thermal { occupancy } => PhotonNumberLaw::Thermal { occupancy },
            LawSpec::ThermalFromTemperature { temperature_k } => {
                let p = profile.as_ref().ok_or_else(|| {
                    ConfigError::Invalid(
                        "source.law.thermal_from_temperature needs source.profile".into(),
                    )
                })?;
                let occupancy = thermal_occupancy(p.omega0(), temperature_k)
                    .map_err(|e| ConfigError::Invalid(format!("source.law: {e}")))?;
                PhotonNumberLaw::Thermal { occupancy }
            }
            LawSpec::Fock { n } => PhotonNumberLaw::Fock { n },
        };
        let source = SourceConfig::new(law, self.source.rate_hz)
            .map_err(|e| ConfigError::Invalid(format!("source: {e}")))?;

        let epsilon = match (self.geometry.delta_l_m, self.geometry.delay_s) {
            (None, None) => 0.0,
            (Some(_), Some(_)) => {
                return invalid("geometry: give delta_l_m or delay_s, not both")
            }
            (dl, dt) => {
                let p = profile.as_ref().ok_or_else(|| {
                    ConfigError::Invalid(
                        "geometry imbalance needs source.profile to derive decoherence".into(),
                    )
                })?;
                match (dl, dt) {
                    (Some(dl), None) => p.epsilon_from_path_difference(dl),
                    (None, Some(dt)) => p.epsilon_from_delay(dt),
                    _ => unreachable!(),
                }
            }
        };
        if !epsilon.is_finite() {
            return invalid("geometry: imbalance produced a non-finite decoherence parameter");
        }
        if !self.geometry.xi_rad.is_finite() {
            return invalid("geometry.xi_rad must be finite");
        }
        if !(0.0..=1.0).contains(&self.model.eta) || !self.model.eta.is_finite() {
            return invalid(format!("model.eta = {} outside [0, 1]", self.model.eta));
        }
        let model = StateModel {
            epsilon,
            eta: self.model.eta,
            xi: self.geometry.xi_rad,
        };

        if self.sweep.photons_per_setting == 0 {
            return invalid("sweep.photons_per_setting must be at least 1");
        }
        if self.sweep.repeats == 0 {
            return invalid("sweep.repeats must be at least 1");
        }
        let duration = match self.detector.duration_s {
            Some(d) => d,
            None => self.sweep.photons_per_setting as f64 / self.source.rate_hz,
        };
        let mut detector = DetectorConfig::new(
            self.detector.efficiency.as_array(),
            self.detector.dark_rate_hz.as_array(),
            self.detector.dead_time_s,
            self.detector.coincidence_window_s,
            duration,
        )
        .map_err(|e| ConfigError::Invalid(format!("detector: {e}")))?;
        if self.detector.equalize_efficiencies {
            detector = detector.equalize_efficiencies();
        }

        if self.autocorr.points == 0 {
            return invalid("autocorr.points must be at least 1");
        }
        if !self.autocorr.start_m.is_finite() || !self.autocorr.stop_m.is_finite() {
            return invalid("autocorr.start_m/stop_m must be finite");
        }

        Ok(ResolvedExperiment {
            model,
            profile,
            source,
            detector,
            alphas: self.sweep.grid.alphas()?,
            estimator: self.sweep.estimator,
            photons_per_setting: self.sweep.photons_per_setting,
            repeats: self.sweep.repeats,
            seed: self.seed,
            autocorr: self.autocorr,
            output: self.output.clone(),
        })
    }
}

impl ResolvedExperiment {
    /// The ΔL grid of the autocorrelation scan, endpoints included.
    pub fn autocorr_grid(&self) -> Vec<f64> {
        let n = self.autocorr.points;
        let (a, b) = (self.autocorr.start_m, self.autocorr.stop_m);
        (0..n)
            .map(|i| {
                let t = if n == 1 {
                    0.0
                } else {
                    i as f64 / (n - 1) as f64
                };
                a + t * (b - a)
            })
            .collect()
    }
}

// --- presets ---------------------------------------------------------------

/// Names of the built-in presets.
pub fn preset_names() -> Vec<&'static str> {
    vec!["laser", "led", "halogen", "incoherent", "broadband_led"]
}

/// A built-in preset configuration, if `name` is known.
///
/// * `laser` — narrow-line 541 nm laser, Poissonian counting, η = 0.95;
/// * `led` — LED filtered at 531 nm / 1 nm (fitted σ_ω = 6.5e12 rad/s),
///   thermal counting, η = 0.87;
/// * `halogen` — 3000 K halogen lamp behind the same filter, η = 0.91;
/// * `incoherent` — the filtered LED with a 1 mm arm imbalance (≫ l_c, so
///   ε = 1), η = 0.89;
/// * `broadband_led` — the unfiltered LED (fitted σ_ω = 134e12 rad/s), for
///   short-coherence autocorrelation scans.
pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    let narrow_profile = ProfileSpec {
        omega0_rad_per_s: Some(3547.24e12),
        sigma_omega_rad_per_s: Some(6.5e12),
        amplitude: Some(0.985),
        ..ProfileSpec::default()
    };
    let default_sweep = SweepSpec {
        grid: GridSpec {
            parameter: GridParameter::Theta,
            start_rad: 0.0,
            stop_rad: std::f64::consts::FRAC_PI_2,
            points: 33,
        },
        photons_per_setting: 100_000,
        // The bench reports each point as the average of several
        // measurements; ten acquisitions are pooled per point.
        repeats: 10,
        estimator: EstimatorMode::FourChannel,
    };
    let base = |law: LawSpec, profile: ProfileSpec, eta: f64| ExperimentConfig {
        source: SourceSpec {
            law,
            rate_hz: 2e5,
            profile: Some(profile),
        },
        geometry: GeometrySpec::default(),
        detector: DetectorSpec::default(),
        model: ModelSpec { eta },
        sweep: default_sweep,
        autocorr: AutocorrSpec::default(),
        seed: None,
        output: OutputSpec::default(),
    };
    let cfg = match name {
        "laser" => base(
            LawSpec::Poissonian { mean: 0.05 },
            ProfileSpec {
                // Narrow single-line laser: coherence length of kilometers,
                // so any bench-scale imbalance keeps ε = 0.
                omega0_rad_per_s: Some(std::f64::consts::TAU * SPEED_OF_LIGHT / 541e-9),
                sigma_omega_rad_per_s: Some(1e6),
                amplitude: Some(1.0),
                ..ProfileSpec::default()
            },
            0.95,
        ),
        "led" => base(LawSpec::Thermal { occupancy: 0.01 }, narrow_profile, 0.87),
        "halogen" => base(
            LawSpec::ThermalFromTemperature { temperature_k: 3000.0 },
            narrow_profile,
            0.91,
        ),
        "incoherent" => {
            let mut cfg = base(LawSpec::Thermal { occupancy: 0.01 }, narrow_profile, 0.89);
            cfg.geometry.delta_l_m = Some(1e-3);
            cfg
        }
        "broadband_led" => base(
            LawSpec::Thermal { occupancy: 0.01 },
            ProfileSpec {
                omega0_rad_per_s: Some(3611.4e12),
                sigma_omega_rad_per_s: Some(134.0e12),
                amplitude: Some(0.932),
                ..ProfileSpec::default()
            },
            0.87,
        ),
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}

// --- file loading with preset merging --------------------------------------

fn deep_merge(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses a config from a JSON string, expanding an optional `"preset"` key
/// by deep-merging the remaining fields over the named preset.
pub fn config_from_json(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    let preset_name = value
        .as_object_mut()
        .and_then(|o| o.remove("preset"))
        .map(|v| match v {
            serde_json::Value::String(s) => Ok(s),
            other => invalid(format!("preset must be a string, got {other}")),
        })
        .transpose()?;
    let merged = match preset_name {
        Some(name) => {
            let mut base = serde_json::to_value(preset(&name)?)?;
            deep_merge(&mut base, value);
            base
        }
        None => value,
    };
    Ok(serde_json::from_value(merged)?)
}

/// Loads a config file (see [`config_from_json`]).
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    config_from_json(&text)
}
