//! Desk-scale simulator and analysis toolkit for single-photon
//! entanglement between the momentum and polarization of one photon.
//!
//! The library models the full bench: Bell-state generation in a
//! displaced Sagnac interferometer (with a coherence-dependent dephasing
//! parameter ε derived from the source spectrum), local rotations of the
//! momentum and polarization qubits, photon-counting statistics for
//! laser/LED/lamp-class sources, a four-channel detector stack with
//! efficiency, dark counts and dead time, and CHSH estimators with error
//! propagation.
//!
//! Module map:
//! * [`qstate`] — two-qubit state algebra (4-dimensional, momentum ⊗
//!   polarization) with validated states, unitaries and probabilities;
//! * [`optics`] — bench elements: beam-splitter and half-wave-plate
//!   rotations, Bell-state preparation, rotated projector stacks;
//! * [`coherence`] — spectral profiles, coherence scales, the dephasing
//!   law ε, and interference integrals with a quadrature cross-check;
//! * [`photostats`] — photon-number laws, arrival sampling, and
//!   multinomial outcome statistics with brute-force oracles;
//! * [`detector`] — efficiency, dark counts, dead time, coincidence
//!   bookkeeping;
//! * [`bell`] — CHSH settings, estimators, closed-form S curves, fringe
//!   visibility, and the Monte Carlo sweep driver;
//! * [`config`] — JSON experiment configs and bench presets;
//! * [`report`] — versioned CSV/JSON rendering and the run manifest;
//! * [`commands`] — the subcommand layer used by the `spe` binary;
//! * [`validate`] — named, deterministic self-checks of the physics;
//! * [`rng`] — deterministic per-task random streams.

pub mod bell;
pub mod coherence;
pub mod commands;
pub mod config;
pub mod constants;
pub mod detector;
pub mod optics;
pub mod photostats;
pub mod qstate;
pub mod report;
pub mod rng;
pub mod validate;

pub use bell::{theory_s, ChshSettingSet, EstimatorMode, StateModel, SweepOutcome, SweepPoint};
pub use coherence::SpectralProfile;
pub use config::ExperimentConfig;
pub use detector::{ChannelCounts, DetectorConfig};
pub use qstate::{Channel, ChannelProbabilities, DensityMatrix, LocalUnitary, StateVector};
pub use rng::RngFactory;
