//! Detector chain: per-channel quantum efficiency, dark counts, a
//! non-paralyzable dead time, and coincidence-window bookkeeping.
//!
//! Source photons arrive as a timed stream, land in a channel according to
//! the prepared state's probabilities, survive an efficiency Bernoulli
//! trial, and are merged with dark clicks on the same channel; the merged
//! timeline then passes through the dead-time filter (dark avalanches
//! paralyze a real SPAD exactly like photon clicks, so the filter acts on
//! the merged stream). Clicks closer together than the coincidence window
//! across distinct channels are tallied as coincidence windows.

use crate::photostats::{sample_arrivals, sample_channel, PhotoStatsError, SourceConfig};
use crate::qstate::{Channel, ChannelProbabilities};
use crate::rng::SimRng;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

/// Detection efficiency of the bench's silicon SPADs at the working
/// wavelength.
pub const DEFAULT_EFFICIENCY: f64 = 0.52;
/// Typical dark-count rate per detector (Hz).
pub const DEFAULT_DARK_RATE: f64 = 5.0;
/// Detector dead time (seconds).
pub const DEFAULT_DEAD_TIME: f64 = 22e-9;
/// Coincidence window used when clustering clicks (seconds).
pub const DEFAULT_COINCIDENCE_WINDOW: f64 = 1e-9;

/// Errors from detector configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error("efficiency {value} outside [0, 1] on channel {channel}")]
    EfficiencyOutOfRange { channel: &'static str, value: f64 },
    #[error("dark rate {value} is negative or non-finite on channel {channel}")]
    InvalidDarkRate { channel: &'static str, value: f64 },
    #[error("dead time {value} is negative or non-finite")]
    InvalidDeadTime { value: f64 },
    #[error("coincidence window {value} is negative or non-finite")]
    InvalidCoincidenceWindow { value: f64 },
    #[error("acquisition duration {value} must be finite and > 0")]
    InvalidDuration { value: f64 },
    #[error(transparent)]
    Source(#[from] PhotoStatsError),
}

/// Configuration of the four-detector readout for one acquisition window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    efficiency: [f64; 4],
    dark_rate: [f64; 4],
    dead_time: f64,
    coincidence_window: f64,
    duration: f64,
}

impl DetectorConfig {
    /// Fully explicit constructor.
    pub fn new(
        efficiency: [f64; 4],
        dark_rate: [f64; 4],
        dead_time: f64,
        coincidence_window: f64,
        duration: f64,
    ) -> Result<DetectorConfig, DetectorError> {
        for (i, &e) in efficiency.iter().enumerate() {
            if !e.is_finite() || !(0.0..=1.0).contains(&e) {
                return Err(DetectorError::EfficiencyOutOfRange {
                    channel: Channel::ALL[i].label(),
                    value: e,
                });
            }
        }
        for (i, &d) in dark_rate.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(DetectorError::InvalidDarkRate {
                    channel: Channel::ALL[i].label(),
                    value: d,
                });
            }
        }
        if !dead_time.is_finite() || dead_time < 0.0 {
            return Err(DetectorError::InvalidDeadTime { value: dead_time });
        }
        if !coincidence_window.is_finite() || coincidence_window < 0.0 {
            return Err(DetectorError::InvalidCoincidenceWindow {
                value: coincidence_window,
            });
        }
        if !duration.is_finite() || duration <= 0.0 {
            return Err(DetectorError::InvalidDuration { value: duration });
        }
        Ok(DetectorConfig {
            efficiency,
            dark_rate,
            dead_time,
            coincidence_window,
            duration,
        })
    }

    /// Lossless, noiseless, instantaneous detectors — for isolating the
    /// statistics of the state itself.
    pub fn ideal(duration: f64) -> Result<DetectorConfig, DetectorError> {
        DetectorConfig::new([1.0; 4], [0.0; 4], 0.0, DEFAULT_COINCIDENCE_WINDOW, duration)
    }

    /// The measured bench parameters: 52% efficiency, ~5 Hz dark counts,
    /// 22 ns dead time, 1 ns coincidence window.
    pub fn bench_defaults(duration: f64) -> Result<DetectorConfig, DetectorError> {
        DetectorConfig::new(
            [DEFAULT_EFFICIENCY; 4],
            [DEFAULT_DARK_RATE; 4],
            DEFAULT_DEAD_TIME,
            DEFAULT_COINCIDENCE_WINDOW,
            duration,
        )
    }

    /// Copy of this configuration with every channel's efficiency lowered to
    /// the worst channel's value — the standard balancing step before
    /// correlation estimates, since a *common* efficiency factor cancels in
    /// normalized quantities.
    pub fn equalize_efficiencies(&self) -> DetectorConfig {
        let min = self.efficiency.iter().copied().fold(f64::INFINITY, f64::min);
        DetectorConfig {
            efficiency: [min; 4],
            ..*self
        }
    }

    pub fn efficiency(&self) -> [f64; 4] {
        self.efficiency
    }

    pub fn dark_rate(&self) -> [f64; 4] {
        self.dark_rate
    }

    pub fn dead_time(&self) -> f64 {
        self.dead_time
    }

    pub fn coincidence_window(&self) -> f64 {
        self.coincidence_window
    }

    /// Acquisition duration (seconds).
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Copy with a different acquisition duration.
    pub fn with_duration(&self, duration: f64) -> Result<DetectorConfig, DetectorError> {
        DetectorConfig::new(
            self.efficiency,
            self.dark_rate,
            self.dead_time,
            self.coincidence_window,
            duration,
        )
    }
}

/// Accepted counts per channel plus bookkeeping tallies from one
/// acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct ChannelCounts {
    counts: [u64; 4],
    dark_tally: u64,
    dropped_dead_time: u64,
    coincidence_windows: u64,
}

impl ChannelCounts {
    /// Builds counts directly (e.g. from recorded data); tallies default
    /// to zero.
    pub fn from_counts(counts: [u64; 4]) -> ChannelCounts {
        ChannelCounts {
            counts,
            ..ChannelCounts::default()
        }
    }

    pub fn get(&self, ch: Channel) -> u64 {
        self.counts[ch.index()]
    }

    pub fn as_array(&self) -> [u64; 4] {
        self.counts
    }

    /// Total accepted counts over all channels.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Accepted clicks that originated as dark counts.
    pub fn dark_tally(&self) -> u64 {
        self.dark_tally
    }

    /// Clicks discarded because they fell inside a dead-time window.
    pub fn dropped_dead_time(&self) -> u64 {
        self.dropped_dead_time
    }

    /// Click clusters (gap ≤ coincidence window) spanning ≥ 2 distinct
    /// channels. A single photon cannot produce these; they count
    /// multi-photon and photon–dark accidentals.
    pub fn coincidence_windows(&self) -> u64 {
        self.coincidence_windows
    }

    /// Accumulates another acquisition into this one. Aggregation is
    /// associative and commutative.
    pub fn merge(&mut self, other: &ChannelCounts) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
        self.dark_tally += other.dark_tally;
        self.dropped_dead_time += other.dropped_dead_time;
        self.coincidence_windows += other.coincidence_windows;
    }
}

/// Simulates one acquisition window: photons of `src` land according to
/// `probs`, pass the detector chain of `det`, and are tallied per channel.
pub fn simulate_counts(
    probs: &ChannelProbabilities,
    src: &SourceConfig,
    det: &DetectorConfig,
    rng: &mut SimRng,
) -> Result<ChannelCounts, DetectorError> {
    let arrivals = sample_arrivals(src, det.duration, rng)?;

    // Channel assignment and efficiency thinning, in arrival order so the
    // draw sequence is a pure function of the configuration.
    let mut clicks: [Vec<f64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for &t in &arrivals {
        let ch = sample_channel(probs, rng);
        let u: f64 = rng.random();
        if u < det.efficiency[ch.index()] {
            clicks[ch.index()].push(t);
        }
    }

    let mut out = ChannelCounts::default();
    let mut accepted: Vec<(f64, usize)> = Vec::new();
    for (idx, photon_times) in clicks.iter().enumerate() {
        // Dark clicks of this channel, uniform over the window.
        let mut dark_times = Vec::new();
        let mean_dark = det.dark_rate[idx] * det.duration;
        if mean_dark > 0.0 {
            let n = Poisson::new(mean_dark).expect("validated dark rate").sample(rng) as u64;
            dark_times.reserve(n as usize);
            for _ in 0..n {
                dark_times.push(rng.random_range(0.0..det.duration));
            }
            dark_times.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite times"));
        }

        // Merge the two sorted timelines, tagging click origin.
        let mut timeline: Vec<(f64, bool)> = Vec::with_capacity(photon_times.len() + dark_times.len());
        let (mut i, mut j) = (0, 0);
        while i < photon_times.len() || j < dark_times.len() {
            let take_photon = j >= dark_times.len()
                || (i < photon_times.len() && photon_times[i] <= dark_times[j]);
            if take_photon {
                timeline.push((photon_times[i], false));
                i += 1;
            } else {
                timeline.push((dark_times[j], true));
                j += 1;
            }
        }

        // Non-paralyzable dead time: a click is accepted iff it falls at or
        // after the end of the window opened by the last accepted click;
        // rejected clicks do not extend the window.
        let mut last_accept = f64::NEG_INFINITY;
        for &(t, is_dark) in &timeline {
            if t - last_accept >= det.dead_time {
                last_accept = t;
                out.counts[idx] += 1;
                if is_dark {
                    out.dark_tally += 1;
                }
                accepted.push((t, idx));
            } else {
                out.dropped_dead_time += 1;
            }
        }
    }

    // Coincidence clustering across channels: chain clicks whose gaps are
    // within the window and count clusters touching ≥ 2 distinct channels.
    accepted.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times"));
    let mut k = 0;
    while k < accepted.len() {
        let mut seen = [false; 4];
        seen[accepted[k].1] = true;
        let mut end = k;
        while end + 1 < accepted.len()
            && accepted[end + 1].0 - accepted[end].0 <= det.coincidence_window
        {
            end += 1;
            seen[accepted[end].1] = true;
        }
        if seen.iter().filter(|s| **s).count() >= 2 {
            out.coincidence_windows += 1;
        }
        k = end + 1;
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::bell_state;
    use crate::photostats::PhotonNumberLaw;
    use crate::rng::RngFactory;

    fn poisson_source(rate: f64) -> SourceConfig {
        SourceConfig::new(PhotonNumberLaw::Poissonian { mean: 0.05 }, rate).unwrap()
    }

    fn bell_probs() -> ChannelProbabilities {
        bell_state().probabilities()
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            DetectorConfig::new([1.2, 1.0, 1.0, 1.0], [0.0; 4], 0.0, 1e-9, 1.0),
            Err(DetectorError::EfficiencyOutOfRange { .. })
        ));
        assert!(matches!(
            DetectorConfig::new([1.0; 4], [-1.0, 0.0, 0.0, 0.0], 0.0, 1e-9, 1.0),
            Err(DetectorError::InvalidDarkRate { .. })
        ));
        assert!(matches!(
            DetectorConfig::new([1.0; 4], [0.0; 4], -1e-9, 1e-9, 1.0),
            Err(DetectorError::InvalidDeadTime { .. })
        ));
        assert!(matches!(
            DetectorConfig::new([1.0; 4], [0.0; 4], 0.0, 1e-9, 0.0),
            Err(DetectorError::InvalidDuration { .. })
        ));
    }

    #[test]
    fn equalize_lowers_every_channel_to_the_minimum() {
        let det = DetectorConfig::new([0.52, 0.50, 0.48, 0.51], [0.0; 4], 0.0, 1e-9, 1.0)
            .unwrap()
            .equalize_efficiencies();
        assert_eq!(det.efficiency(), [0.48; 4]);
    }

    #[test]
    fn ideal_detector_counts_every_arrival() {
        let src = poisson_source(2e5);
        let det = DetectorConfig::ideal(0.2).unwrap();
        let mut rng = RngFactory::new(11).stream(0);
        let counts = simulate_counts(&bell_probs(), &src, &det, &mut rng).unwrap();

        let expected = src.mean_rate() * det.duration();
        let tol = 5.0 * expected.sqrt();
        assert!(((counts.total() as f64) - expected).abs() < tol);
        assert_eq!(counts.dark_tally(), 0);
        assert_eq!(counts.dropped_dead_time(), 0);

        // Bell statistics: all counts in 0H and 1V, split evenly.
        assert_eq!(counts.get(Channel::ZeroV), 0);
        assert_eq!(counts.get(Channel::OneH), 0);
        let (a, b) = (counts.get(Channel::ZeroH) as f64, counts.get(Channel::OneV) as f64);
        assert!((a - b).abs() < 5.0 * (0.5 * (a + b)).sqrt());
    }

    #[test]
    fn zero_efficiency_leaves_only_dark_counts() {
        let src = poisson_source(1e5);
        let det = DetectorConfig::new([0.0; 4], [50.0; 4], 0.0, 1e-9, 1.0).unwrap();
        let mut rng = RngFactory::new(12).stream(0);
        let counts = simulate_counts(&bell_probs(), &src, &det, &mut rng).unwrap();
        assert_eq!(counts.total(), counts.dark_tally());
        let expected = 4.0 * 50.0;
        assert!(((counts.total() as f64) - expected).abs() < 5.0 * expected.sqrt());
    }

    #[test]
    fn dead_time_longer_than_window_caps_channels_at_one() {
        let src = poisson_source(1e6);
        // Dead time far exceeds the acquisition window.
        let det = DetectorConfig::new([1.0; 4], [100.0; 4], 1.0, 1e-9, 1e-3).unwrap();
        for seed in 0..5 {
            let mut rng = RngFactory::new(seed).stream(0);
            let counts = simulate_counts(&bell_probs(), &src, &det, &mut rng).unwrap();
            for ch in Channel::ALL {
                assert!(counts.get(ch) <= 1, "channel {ch} counted twice in dead time");
            }
        }
    }

    #[test]
    fn dead_time_drop_fraction_stays_small_at_bench_rates() {
        let src = poisson_source(2e5);
        let det = DetectorConfig::bench_defaults(0.5).unwrap();
        let mut rng = RngFactory::new(13).stream(0);
        let counts = simulate_counts(&bell_probs(), &src, &det, &mut rng).unwrap();
        let dropped = counts.dropped_dead_time() as f64;
        let seen = counts.total() as f64 + dropped;
        assert!(dropped / seen < 0.01, "dropped fraction {}", dropped / seen);
    }

    #[test]
    fn dark_floor_fills_empty_channels() {
        // State never sends photons to 0V/1H; whatever lands there is dark.
        let src = poisson_source(1e4);
        let det = DetectorConfig::new([1.0; 4], [20.0; 4], 0.0, 1e-9, 2.0).unwrap();
        let mut rng = RngFactory::new(14).stream(0);
        let counts = simulate_counts(&bell_probs(), &src, &det, &mut rng).unwrap();
        let expected = 20.0 * det.duration();
        for ch in [Channel::ZeroV, Channel::OneH] {
            let n = counts.get(ch) as f64;
            assert!((n - expected).abs() < 5.0 * expected.sqrt(), "{ch}: {n}");
        }
        assert!(counts.dark_tally() > 0);
    }

    #[test]
    fn single_channel_streams_produce_no_coincidences() {
        let probs = ChannelProbabilities::new([0.0, 1.0, 0.0, 0.0]).unwrap();
        let src = poisson_source(1e6);
        let det = DetectorConfig::new([1.0; 4], [0.0; 4], 0.0, 10e-9, 0.05).unwrap();
        let mut rng = RngFactory::new(15).stream(0);
        let counts = simulate_counts(&probs, &src, &det, &mut rng).unwrap();
        assert_eq!(counts.coincidence_windows(), 0);
        assert!(counts.total() > 10_000);
    }

    #[test]
    fn crowded_channels_produce_coincidences() {
        // Two busy channels and a generous window: accidentals guaranteed.
        let src = poisson_source(1e6);
        let det = DetectorConfig::new([1.0; 4], [0.0; 4], 0.0, 1e-6, 0.05).unwrap();
        let mut rng = RngFactory::new(16).stream(0);
        let counts = simulate_counts(&bell_probs(), &src, &det, &mut rng).unwrap();
        assert!(counts.coincidence_windows() > 100);
    }

    #[test]
    fn merge_is_associative_totaling() {
        let src = poisson_source(1e5);
        let det = DetectorConfig::bench_defaults(0.1).unwrap();
        let f = RngFactory::new(17);
        let a = simulate_counts(&bell_probs(), &src, &det, &mut f.stream(0)).unwrap();
        let b = simulate_counts(&bell_probs(), &src, &det, &mut f.stream(1)).unwrap();
        let c = simulate_counts(&bell_probs(), &src, &det, &mut f.stream(2)).unwrap();

        let mut left = a;
        left.merge(&b);
        left.merge(&c);
        let mut right = b;
        right.merge(&c);
        let mut right_total = a;
        right_total.merge(&right);
        assert_eq!(left, right_total);
        assert_eq!(left.total(), a.total() + b.total() + c.total());
    }

    #[test]
    fn reruns_with_same_stream_are_identical() {
        let src = poisson_source(2e5);
        let det = DetectorConfig::bench_defaults(0.2).unwrap();
        let f = RngFactory::new(18);
        let a = simulate_counts(&bell_probs(), &src, &det, &mut f.stream(5)).unwrap();
        let b = simulate_counts(&bell_probs(), &src, &det, &mut f.stream(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn common_efficiency_factor_cancels_in_correlation() {
        // The loss-robustness property at module scale: estimate E from the
        // same physical distribution at η_d = 1.0 and 0.52 and compare.
        let probs = crate::optics::measurement_probabilities(
            &bell_state().projector(),
            &crate::optics::MeasurementSetting::new(0.0, std::f64::consts::FRAC_PI_8).unwrap(),
        );
        let src = poisson_source(2e5);
        let f = RngFactory::new(19);
        let mut estimates = Vec::new();
        for (i, eff) in [1.0, 0.52].into_iter().enumerate() {
            let det = DetectorConfig::new([eff; 4], [0.0; 4], 0.0, 1e-9, 2.5).unwrap();
            let counts = simulate_counts(&probs, &src, &det, &mut f.stream(i as u64)).unwrap();
            let n = counts.total() as f64;
            let e = Channel::ALL
                .iter()
                .map(|ch| ch.correlation_sign() * counts.get(*ch) as f64)
                .sum::<f64>()
                / n;
            let se = ((1.0 - e * e) / n).sqrt();
            estimates.push((e, se));
        }
        let (e1, s1) = estimates[0];
        let (e2, s2) = estimates[1];
        let combined = (s1 * s1 + s2 * s2).sqrt();
        assert!(
            (e1 - e2).abs() < 5.0 * combined,
            "E(η=1) = {e1} vs E(η=0.52) = {e2}, 5σ = {}",
            5.0 * combined
        );
    }
}
