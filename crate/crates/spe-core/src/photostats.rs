//! Photon-number statistics of the light sources and the combinatorics of
//! distributing n photons over the four detection channels.
//!
//! The per-window photon number follows the source's number law (Poissonian
//! for laser light, thermal/Bose–Einstein for filtered LED and halogen
//! light, Fock for an idealized number state), while photon *arrivals* are
//! modeled as a homogeneous Poisson process at the source's mean rate. Given
//! n photons and channel probabilities p, outcome strings follow the
//! multinomial law; a brute-force enumeration over all 4ⁿ orderings is kept
//! as an oracle for it.

use crate::qstate::{Channel, ChannelProbabilities};
use crate::rng::SimRng;
use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric, Poisson};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

/// Largest photon number the brute-force oracle accepts (4⁸ = 65 536 terms).
pub const BRUTE_FORCE_MAX_PHOTONS: u32 = 8;

/// Tolerance on Σ weights = 1 in [`mixture_expectation`].
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Errors from source configuration and outcome statistics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhotoStatsError {
    /// A distribution parameter is out of range.
    #[error("invalid source parameter: {what}")]
    InvalidParameter { what: &'static str },
    /// Brute-force enumeration over 4ⁿ orderings was refused.
    #[error("photon number {n} exceeds brute-force limit {max}")]
    TooLarge { n: u32, max: u32 },
    /// Mixture weights do not sum to 1.
    #[error("mixture weights sum to {sum:.12}, expected 1")]
    UnnormalizedWeights { sum: f64 },
    /// Fewer per-n values than weights were supplied.
    #[error("need a value for every weight: {values} values for {weights} weights")]
    LengthMismatch { weights: usize, values: usize },
}

/// Photon-number law of a light source.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhotonNumberLaw {
    /// Coherent (laser) light: P_n = e^{−μ}μⁿ/n!.
    Poissonian { mean: f64 },
    /// Thermal light: P_n = n̄ⁿ/(1+n̄)^{n+1}.
    Thermal { occupancy: f64 },
    /// An n-photon number state.
    Fock { n: u32 },
}

impl PhotonNumberLaw {
    fn validate(&self) -> Result<(), PhotoStatsError> {
        match self {
            PhotonNumberLaw::Poissonian { mean } => {
                if !mean.is_finite() || *mean <= 0.0 {
                    return Err(PhotoStatsError::InvalidParameter {
                        what: "Poissonian mean must be finite and > 0",
                    });
                }
            }
            PhotonNumberLaw::Thermal { occupancy } => {
                if !occupancy.is_finite() || *occupancy <= 0.0 {
                    return Err(PhotoStatsError::InvalidParameter {
                        what: "thermal occupancy must be finite and > 0",
                    });
                }
            }
            PhotonNumberLaw::Fock { .. } => {}
        }
        Ok(())
    }
}

/// A light source: its photon-number law and mean count rate (photons/s)
/// entering the apparatus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig {
    law: PhotonNumberLaw,
    mean_rate: f64,
}

impl SourceConfig {
    pub fn new(law: PhotonNumberLaw, mean_rate: f64) -> Result<SourceConfig, PhotoStatsError> {
        law.validate()?;
        if !mean_rate.is_finite() || mean_rate <= 0.0 {
            return Err(PhotoStatsError::InvalidParameter {
                what: "mean rate must be finite and > 0",
            });
        }
        Ok(SourceConfig { law, mean_rate })
    }

    pub fn law(&self) -> PhotonNumberLaw {
        self.law
    }

    /// Mean photon rate (photons/s).
    pub fn mean_rate(&self) -> f64 {
        self.mean_rate
    }
}

/// P(N = n) under a photon-number law.
pub fn photon_number_pmf(law: &PhotonNumberLaw, n: u32) -> f64 {
    match law {
        PhotonNumberLaw::Poissonian { mean } => {
            // exp(−μ + n·ln μ − ln n!) to stay stable for large n.
            (-mean + f64::from(n) * mean.ln() - ln_gamma(f64::from(n) + 1.0)).exp()
        }
        PhotonNumberLaw::Thermal { occupancy } => {
            let q = occupancy / (1.0 + occupancy);
            q.powi(n as i32) / (1.0 + occupancy)
        }
        PhotonNumberLaw::Fock { n: k } => {
            if n == *k {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Mean thermal occupancy of a mode at angular frequency ω and temperature
/// T: n̄ = 1/(e^{ħω/k_BT} − 1).
pub fn thermal_occupancy(omega: f64, temperature: f64) -> Result<f64, PhotoStatsError> {
    if !omega.is_finite() || !temperature.is_finite() || omega <= 0.0 || temperature <= 0.0 {
        return Err(PhotoStatsError::InvalidParameter {
            what: "thermal occupancy requires ω > 0 and T > 0",
        });
    }
    let x = crate::constants::HBAR * omega / (crate::constants::BOLTZMANN * temperature);
    Ok(1.0 / (x.exp() - 1.0))
}

/// Draws one photon number from the law.
pub fn sample_photon_number(law: &PhotonNumberLaw, rng: &mut SimRng) -> u32 {
    match law {
        PhotonNumberLaw::Poissonian { mean } => {
            let d = Poisson::new(*mean).expect("validated mean");
            d.sample(rng) as u32
        }
        PhotonNumberLaw::Thermal { occupancy } => {
            // Bose–Einstein = geometric number of failures with success
            // probability 1/(1+n̄).
            let d = Geometric::new(1.0 / (1.0 + occupancy)).expect("validated occupancy");
            d.sample(rng) as u32
        }
        PhotonNumberLaw::Fock { n } => *n,
    }
}

/// Arrival times of photons over `[0, duration)`: a homogeneous Poisson
/// process at the source's mean rate (exponential inter-arrival gaps),
/// returned sorted. The number law shapes per-window counting statistics;
/// the arrival process itself is taken Poissonian for every source kind.
pub fn sample_arrivals(
    src: &SourceConfig,
    duration: f64,
    rng: &mut SimRng,
) -> Result<Vec<f64>, PhotoStatsError> {
    if !duration.is_finite() || duration <= 0.0 {
        return Err(PhotoStatsError::InvalidParameter {
            what: "duration must be finite and > 0",
        });
    }
    let gap = Exp::new(src.mean_rate).expect("validated rate");
    let mut times = Vec::with_capacity((src.mean_rate * duration * 1.1) as usize + 16);
    let mut t: f64 = gap.sample(rng);
    while t < duration {
        times.push(t);
        t += gap.sample(rng);
    }
    Ok(times)
}

/// How many of n photons landed in each of the four channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomeString {
    counts: [u32; 4],
}

impl OutcomeString {
    pub fn new(counts: [u32; 4]) -> OutcomeString {
        OutcomeString { counts }
    }

    /// Total photon number n.
    pub fn n(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn count(&self, ch: Channel) -> u32 {
        self.counts[ch.index()]
    }

    pub fn as_array(&self) -> [u32; 4] {
        self.counts
    }
}

/// Multinomial probability of an outcome string:
/// P(o) = n!/(∏ᵢ nᵢ!) · ∏ᵢ pᵢ^{nᵢ}, computed in log space.
pub fn multinomial_outcome_probability(o: &OutcomeString, p: &ChannelProbabilities) -> f64 {
    let n = o.n();
    if n == 0 {
        return 1.0;
    }
    let mut log_p = ln_gamma(f64::from(n) + 1.0);
    for ch in Channel::ALL {
        let k = o.count(ch);
        if k == 0 {
            continue;
        }
        let pi = p.get(ch);
        if pi == 0.0 {
            return 0.0;
        }
        log_p += f64::from(k) * pi.ln() - ln_gamma(f64::from(k) + 1.0);
    }
    log_p.exp()
}

/// Oracle for [`multinomial_outcome_probability`]: explicitly enumerates all
/// 4ⁿ ordered channel assignments and sums the probability of those whose
/// tallies match `o`. Exponential in n; refuses n > [`BRUTE_FORCE_MAX_PHOTONS`].
pub fn brute_force_outcome_probability(
    o: &OutcomeString,
    p: &ChannelProbabilities,
) -> Result<f64, PhotoStatsError> {
    let n = o.n();
    if n > BRUTE_FORCE_MAX_PHOTONS {
        return Err(PhotoStatsError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_PHOTONS,
        });
    }
    if n == 0 {
        return Ok(1.0);
    }
    let probs = p.as_array();
    let mut total = 0.0;
    for code in 0u64..4u64.pow(n) {
        let mut tallies = [0u32; 4];
        let mut weight = 1.0;
        let mut c = code;
        for _ in 0..n {
            let ch = (c % 4) as usize;
            c /= 4;
            tallies[ch] += 1;
            weight *= probs[ch];
        }
        if tallies == o.as_array() {
            total += weight;
        }
    }
    Ok(total)
}

/// Expectation of a per-photon-number quantity under a number-law mixture:
/// Σₙ wₙ·vₙ with `weights[n]` = P(N = n) (must sum to 1 within
/// [`WEIGHT_SUM_TOL`]) and `values[n]` the quantity at fixed n.
pub fn mixture_expectation(weights: &[f64], values: &[f64]) -> Result<f64, PhotoStatsError> {
    if values.len() < weights.len() {
        return Err(PhotoStatsError::LengthMismatch {
            weights: weights.len(),
            values: values.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(PhotoStatsError::UnnormalizedWeights { sum });
    }
    Ok(weights.iter().zip(values.iter()).map(|(w, v)| w * v).sum())
}

/// Truncated Poisson weights P(N = n) for n = 0..=max_n, renormalized over
/// the truncation so they form a distribution usable with
/// [`mixture_expectation`].
pub fn poisson_weights(mean: f64, max_n: u32) -> Result<Vec<f64>, PhotoStatsError> {
    let law = PhotonNumberLaw::Poissonian { mean };
    law.validate()?;
    let mut w: Vec<f64> = (0..=max_n).map(|n| photon_number_pmf(&law, n)).collect();
    let sum: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= sum;
    }
    Ok(w)
}

/// |Cₙ|² for a coherent state computed through the *amplitude* route,
/// Cₙ = e^{−μ/2}·μ^{n/2}/√(n!), rather than through the Poisson pmf; the
/// two must agree identically and tests hold them to that.
pub fn coherent_amplitude_weights(mean: f64, max_n: u32) -> Result<Vec<f64>, PhotoStatsError> {
    if !mean.is_finite() || mean <= 0.0 {
        return Err(PhotoStatsError::InvalidParameter {
            what: "coherent-state mean must be finite and > 0",
        });
    }
    Ok((0..=max_n)
        .map(|n| {
            let log_amp = -0.5 * mean + 0.5 * f64::from(n) * mean.ln()
                - 0.5 * ln_gamma(f64::from(n) + 1.0);
            let amp = log_amp.exp();
            amp * amp
        })
        .collect())
}

/// Draws the landing channel of one photon.
pub fn sample_channel(p: &ChannelProbabilities, rng: &mut SimRng) -> Channel {
    let u: f64 = rng.random();
    let probs = p.as_array();
    let mut acc = 0.0;
    for ch in Channel::ALL {
        acc += probs[ch.index()];
        if u < acc {
            return ch;
        }
    }
    // Accumulated rounding can leave u just above acc; the last channel
    // absorbs the remainder.
    Channel::OneH
}

/// Draws an outcome string for n independent photons.
pub fn sample_outcome(n: u32, p: &ChannelProbabilities, rng: &mut SimRng) -> OutcomeString {
    let mut counts = [0u32; 4];
    for _ in 0..n {
        counts[sample_channel(p, rng).index()] += 1;
    }
    OutcomeString::new(counts)
}

/// All outcome strings with total photon number n, in lexicographic order.
/// Handy for normalization checks and goodness-of-fit binning.
pub fn enumerate_outcomes(n: u32) -> Vec<OutcomeString> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=(n - a) {
            for c in 0..=(n - a - b) {
                out.push(OutcomeString::new([a, b, c, n - a - b - c]));
            }
        }
    }
    out
}
