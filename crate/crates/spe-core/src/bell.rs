//! CHSH measurement: canonical setting sets, correlation estimators with
//! statistical errors, closed-form S curves, fringe visibility, and the
//! Monte Carlo sweep driver.
//!
//! Canonical settings follow the Bloch-angle assignment
//! (a, a′, b, b′) = (0, 2α, α, 3α): momentum phases φ ∈ {0, 2α} and
//! polarization rotations θ ∈ {α/2, 3α/2}. With the combination
//! S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′) this yields
//!
//! * S(α) = 3cos α − cos 3α for the pure Bell-type state (maximum 2√2 at
//!   α = π/4),
//! * S_mixed(α) = 2cos³α − 2sin²α·cos 3α for the fully dephased state
//!   (never exceeding 2),
//!
//! and the interpolated, quality-scaled form
//! S = η·[(1−ε)·S_pure + ε·S_mixed].

use crate::coherence::{effective_state, rho_epsilon, CoherenceError};
use crate::detector::{simulate_counts, ChannelCounts, DetectorConfig, DetectorError};
use crate::optics::{measurement_probabilities, MeasurementSetting, OpticsError};
use crate::photostats::SourceConfig;
use crate::qstate::{Channel, DensityMatrix};
use crate::rng::{RngFactory, STREAMS_PER_SWEEP_POINT};
use rayon::prelude::*;
use thiserror::Error;

/// Human-readable labels of the four canonical CHSH settings, in the fixed
/// order used everywhere: (a,b), (a,b′), (a′,b), (a′,b′).
pub const SETTING_LABELS: [&str; 4] = ["ab", "ab_prime", "a_prime_b", "a_prime_b_prime"];

/// Errors from CHSH analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BellError {
    /// A model parameter is outside its domain.
    #[error("parameter {name} = {value} outside its valid range")]
    ParamOutOfRange { name: &'static str, value: f64 },
    /// No counts to estimate a correlation from.
    #[error("cannot estimate a correlation from zero counts")]
    EmptyCounts,
    /// A fringe needs at least two samples.
    #[error("visibility needs at least 2 fringe samples, got {got}")]
    InsufficientSamples { got: usize },
    /// Fringe samples are negative or all zero.
    #[error("fringe is degenerate: samples must be non-negative with a positive maximum")]
    DegenerateFringe,
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Coherence(#[from] CoherenceError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
}

/// The four canonical settings for one CHSH parameter α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettingSet {
    alpha: f64,
    settings: [MeasurementSetting; 4],
}

impl ChshSettingSet {
    /// Canonical Bloch-angle assignment (a, a′, b, b′) = (0, 2α, α, 3α).
    pub fn canonical(alpha: f64) -> Result<ChshSettingSet, BellError> {
        ChshSettingSet::canonical_with_xi(alpha, 0.0)
    }

    /// Canonical settings with a residual generation phase ξ on every
    /// setting (an uncompensated interferometer biases all four jointly).
    pub fn canonical_with_xi(alpha: f64, xi: f64) -> Result<ChshSettingSet, BellError> {
        if !alpha.is_finite() {
            return Err(BellError::ParamOutOfRange {
                name: "alpha",
                value: alpha,
            });
        }
        let (a, a_prime) = (0.0, 2.0 * alpha);
        let (b, b_prime) = (0.5 * alpha, 1.5 * alpha); // θ = Bloch/2
        let mk = |phi: f64, theta: f64| MeasurementSetting::with_xi(phi, theta, xi);
        Ok(ChshSettingSet {
            alpha,
            settings: [
                mk(a, b)?,
                mk(a, b_prime)?,
                mk(a_prime, b)?,
                mk(a_prime, b_prime)?,
            ],
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Settings in the order of [`SETTING_LABELS`].
    pub fn settings(&self) -> &[MeasurementSetting; 4] {
        &self.settings
    }
}

/// Which channels enter the correlation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// All four channels: E = (N_0H + N_1V − N_0V − N_1H)/N.
    FourChannel,
    /// Only the momentum-0 pair: E = (N_0H − N_0V)/(N_0H + N_0V), the
    /// estimator available when only one output port is instrumented.
    TwoChannel,
}

/// Four-channel correlation estimate from one acquisition.
pub fn correlation_from_counts(counts: &ChannelCounts) -> Result<f64, BellError> {
    correlation_with_error(counts, EstimatorMode::FourChannel).map(|(e, _)| e)
}

/// Correlation estimate Ê and its standard error √((1 − Ê²)/N) under the
/// chosen estimator.
pub fn correlation_with_error(
    counts: &ChannelCounts,
    mode: EstimatorMode,
) -> Result<(f64, f64), BellError> {
    let (signed, n) = match mode {
        EstimatorMode::FourChannel => {
            let signed: f64 = Channel::ALL
                .iter()
                .map(|ch| ch.correlation_sign() * counts.get(*ch) as f64)
                .sum();
            (signed, counts.total())
        }
        EstimatorMode::TwoChannel => {
            let (nh, nv) = (counts.get(Channel::ZeroH), counts.get(Channel::ZeroV));
            (nh as f64 - nv as f64, nh + nv)
        }
    };
    if n == 0 {
        return Err(BellError::EmptyCounts);
    }
    let e = signed / n as f64;
    let se = ((1.0 - e * e).max(0.0) / n as f64).sqrt();
    Ok((e, se))
}

/// S = E₁ − E₂ + E₃ + E₄ for correlations in [`SETTING_LABELS`] order.
pub fn s_from_correlations(e: &[f64; 4]) -> f64 {
    e[0] - e[1] + e[2] + e[3]
}

/// Standard error of S from independent per-setting errors.
pub fn s_error(correlation_errors: &[f64; 4]) -> f64 {
    correlation_errors.iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// Closed-form S of the pure Bell-type state: 3cos α − cos 3α.
pub fn theory_s_entangled(alpha: f64) -> f64 {
    3.0 * alpha.cos() - (3.0 * alpha).cos()
}

/// Closed-form S of the fully dephased state:
/// 2cos³α − 2sin²α·cos 3α.
pub fn theory_s_mixed(alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    2.0 * c * c * c - 2.0 * s * s * (3.0 * alpha).cos()
}

fn check_unit(name: &'static str, value: f64) -> Result<(), BellError> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(BellError::ParamOutOfRange { name, value });
    }
    Ok(())
}

/// Closed-form S at CHSH parameter α for decoherence ε and state quality η:
///
/// S(α; ε, η) = η·[(1−ε)·(3cos α − cos 3α) + ε·(2cos³α − 2sin²α·cos 3α)].
pub fn theory_s(alpha: f64, epsilon: f64, eta: f64) -> Result<f64, BellError> {
    if !alpha.is_finite() {
        return Err(BellError::ParamOutOfRange {
            name: "alpha",
            value: alpha,
        });
    }
    check_unit("epsilon", epsilon)?;
    check_unit("eta", eta)?;
    Ok(eta * ((1.0 - epsilon) * theory_s_entangled(alpha) + epsilon * theory_s_mixed(alpha)))
}

/// [`theory_s`] parametrized by the half-wave-plate rotation θ = α/2, the
/// x-axis used when plotting measured curves.
pub fn theory_s_theta(theta: f64, epsilon: f64, eta: f64) -> Result<f64, BellError> {
    theory_s(2.0 * theta, epsilon, eta)
}

/// S computed through the full state/measurement pipeline (density matrix,
/// analyzer unitaries, channel probabilities) instead of the closed form.
/// The two routes must agree to ~1e−12; their agreement is a standing
/// self-check of the whole measurement model.
pub fn pipeline_s(alpha: f64, epsilon: f64, eta: f64, xi: f64) -> Result<f64, BellError> {
    let rho = effective_state(&rho_epsilon(epsilon, xi)?, eta)?;
    let set = ChshSettingSet::canonical(alpha)?;
    let mut e = [0.0; 4];
    for (slot, s) in e.iter_mut().zip(set.settings().iter()) {
        *slot = measurement_probabilities(&rho, s).correlation();
    }
    Ok(s_from_correlations(&e))
}

/// Maximum of |S(α; ε, η)| over α ∈ [0, 2π): coarse grid scan plus
/// golden-section refinement. Returns (argmax, max).
pub fn max_abs_theory_s(epsilon: f64, eta: f64) -> Result<(f64, f64), BellError> {
    check_unit("epsilon", epsilon)?;
    check_unit("eta", eta)?;
    let f = |alpha: f64| -> f64 {
        theory_s(alpha, epsilon, eta)
            .expect("parameters validated")
            .abs()
    };
    let n = 4096;
    let step = std::f64::consts::TAU / n as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f(i as f64 * step);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // Golden-section refinement on the bracketing interval.
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (
        (best_i as f64 - 1.0) * step,
        (best_i as f64 + 1.0) * step,
    );
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let alpha = 0.5 * (lo + hi);
    Ok((alpha, f(alpha)))
}

/// Fringe visibility (max − min)/(max + min) of non-negative fringe samples
/// (counts or probabilities sampled over at least one fringe period).
pub fn visibility(fringe: &[f64]) -> Result<f64, BellError> {
    if fringe.len() < 2 {
        return Err(BellError::InsufficientSamples { got: fringe.len() });
    }
    if fringe.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(BellError::DegenerateFringe);
    }
    let max = fringe.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = fringe.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        return Err(BellError::DegenerateFringe);
    }
    Ok((max - min) / (max + min))
}

/// Exact probability fringe of one channel versus momentum phase φ at fixed
/// polarization rotation θ.
pub fn fringe_curve(
    rho: &DensityMatrix,
    theta: f64,
    phi_grid: &[f64],
    channel: Channel,
) -> Result<Vec<f64>, BellError> {
    let mut out = Vec::with_capacity(phi_grid.len());
    for &phi in phi_grid {
        let s = MeasurementSetting::new(phi, theta)?;
        out.push(measurement_probabilities(rho, &s).get(channel));
    }
    Ok(out)
}

/// One grid point of a Monte Carlo CHSH sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepPoint {
    /// CHSH parameter α (Bloch angle).
    pub alpha: f64,
    /// Half-wave-plate rotation θ = α/2, the conventional x-axis.
    pub theta: f64,
    /// Estimated S.
    pub s: f64,
    /// Standard error of S.
    pub s_err: f64,
    /// Per-setting correlation estimates, [`SETTING_LABELS`] order.
    pub correlations: [f64; 4],
    /// Standard errors of the correlations.
    pub correlation_errors: [f64; 4],
    /// Raw per-setting counts.
    pub counts: [ChannelCounts; 4],
}

/// Result of a full sweep, points in grid order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
}

impl SweepOutcome {
    /// Largest |S| over the sweep, with its point index.
    pub fn max_abs_s(&self) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.s.abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite S"))
    }
}

/// Physics of a sweep: the state model sampled at every grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateModel {
    /// Decoherence parameter ε ∈ [0, 1].
    pub epsilon: f64,
    /// State-quality scale η ∈ [0, 1].
    pub eta: f64,
    /// Residual generation phase ξ.
    pub xi: f64,
}

impl StateModel {
    /// The ideal noiseless model: ε = 0, η = 1, ξ = 0.
    pub fn ideal() -> StateModel {
        StateModel {
            epsilon: 0.0,
            eta: 1.0,
            xi: 0.0,
        }
    }

    /// The sampled density matrix ρ^eff = η·ρ_ε + (1−η)·𝟙/4.
    pub fn density_matrix(&self) -> Result<DensityMatrix, BellError> {
        Ok(effective_state(&rho_epsilon(self.epsilon, self.xi)?, self.eta)?)
    }
}

/// Runs a Monte Carlo CHSH sweep over a grid of α values.
///
/// Each (point, setting) pair draws from its own deterministic RNG stream
/// (see [`RngFactory::sweep_stream`]), so results are byte-identical for a
/// given seed regardless of thread count; points are processed in parallel.
pub fn run_chsh_sweep(
    alpha_grid: &[f64],
    model: &StateModel,
    estimator: EstimatorMode,
    src: &SourceConfig,
    det: &DetectorConfig,
    factory: &RngFactory,
) -> Result<SweepOutcome, BellError> {
    run_chsh_sweep_repeated(alpha_grid, model, estimator, src, det, factory, 1)
}

/// Like [`run_chsh_sweep`], but each (point, setting) acquisition is
/// repeated `repeats` times and the counts are pooled before estimating,
/// mirroring a bench protocol that reports the average of several
/// measurements. Pooling weights each repeat by its recorded counts; the
/// standard error shrinks with the total.
///
/// With `repeats = 1` the RNG stream layout (and therefore every sampled
/// number) is identical to [`run_chsh_sweep`].
pub fn run_chsh_sweep_repeated(
    alpha_grid: &[f64],
    model: &StateModel,
    estimator: EstimatorMode,
    src: &SourceConfig,
    det: &DetectorConfig,
    factory: &RngFactory,
    repeats: u64,
) -> Result<SweepOutcome, BellError> {
    if repeats == 0 {
        return Err(BellError::ParamOutOfRange {
            name: "repeats",
            value: 0.0,
        });
    }
    let rho = model.density_matrix()?;
    let points = alpha_grid
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| -> Result<SweepPoint, BellError> {
            let set = ChshSettingSet::canonical(alpha)?;
            let mut correlations = [0.0; 4];
            let mut correlation_errors = [0.0; 4];
            let mut counts = [ChannelCounts::default(); 4];
            for (j, setting) in set.settings().iter().enumerate() {
                let probs = measurement_probabilities(&rho, setting);
                let mut pooled = ChannelCounts::default();
                for r in 0..repeats {
                    let stream_id =
                        (i as u64 * STREAMS_PER_SWEEP_POINT + j as u64) * repeats + r;
                    let mut rng = factory.stream(stream_id);
                    pooled.merge(&simulate_counts(&probs, src, det, &mut rng)?);
                }
                let (e, se) = correlation_with_error(&pooled, estimator)?;
                correlations[j] = e;
                correlation_errors[j] = se;
                counts[j] = pooled;
            }
            Ok(SweepPoint {
                alpha,
                theta: 0.5 * alpha,
                s: s_from_correlations(&correlations),
                s_err: s_error(&correlation_errors),
                correlations,
                correlation_errors,
                counts,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepOutcome { points })
}
