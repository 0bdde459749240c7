//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line with the measured value and its target.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! lines for passing criteria too.

use spe_core::bell::{
    max_abs_theory_s, pipeline_s, run_chsh_sweep, theory_s, visibility, EstimatorMode, StateModel,
    SweepOutcome,
};
use spe_core::coherence::SpectralProfile;
use spe_core::detector::{simulate_counts, DetectorConfig};
use spe_core::optics::{measurement_probabilities, MeasurementSetting};
use spe_core::photostats::{
    brute_force_outcome_probability, coherent_amplitude_weights, enumerate_outcomes,
    mixture_expectation, multinomial_outcome_probability, photon_number_pmf, PhotonNumberLaw,
    SourceConfig,
};
use spe_core::qstate::{Channel, ChannelProbabilities, DensityMatrix};
use spe_core::rng::RngFactory;
use rand::Rng;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, SQRT_2, TAU};

/// Seed of the committed acceptance run; every criterion derives its
/// streams from it, so the whole gate is reproducible.
const ACCEPTANCE_SEED: u64 = 0xACCE97ED;

const SOURCE_RATE: f64 = 2e5;

fn report(criterion: u8, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] acceptance {criterion:02} {name}: {detail}");
    assert!(pass, "acceptance {criterion:02} {name}: {detail}");
}

fn factory(criterion: u64) -> RngFactory {
    RngFactory::new(ACCEPTANCE_SEED ^ criterion)
}

fn source() -> SourceConfig {
    SourceConfig::new(PhotonNumberLaw::Poissonian { mean: 0.05 }, SOURCE_RATE).unwrap()
}

fn sweep(
    alphas: &[f64],
    model: &StateModel,
    det: &DetectorConfig,
    criterion: u64,
) -> SweepOutcome {
    run_chsh_sweep(
        alphas,
        model,
        EstimatorMode::FourChannel,
        &source(),
        det,
        &factory(criterion),
    )
    .unwrap_or_else(|e| panic!("sweep failed: {e}"))
}

fn theta_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / (points - 1) as f64)
        .collect()
}

/// Max pointwise |S_sim − S_theory| / σ over a sweep against the η-scaled
/// closed form.
fn max_sigma_residual(outcome: &SweepOutcome, epsilon: f64, eta: f64) -> f64 {
    outcome
        .points
        .iter()
        .map(|p| {
            let expect = theory_s(p.alpha, epsilon, eta).unwrap();
            (p.s - expect).abs() / p.s_err
        })
        .fold(0.0, f64::max)
}

/// Monte Carlo fringe: estimated P(0H) over a φ grid at fixed θ.
fn mc_fringe(
    rho: &DensityMatrix,
    theta: f64,
    n_phi: usize,
    photons: u64,
    f: &RngFactory,
    base_stream: u64,
) -> Vec<f64> {
    let src = source();
    let det = DetectorConfig::ideal(photons as f64 / SOURCE_RATE).unwrap();
    (0..n_phi)
        .map(|k| {
            let phi = TAU * k as f64 / n_phi as f64;
            let s = MeasurementSetting::new(phi, theta).unwrap();
            let probs = measurement_probabilities(rho, &s);
            let mut rng = f.stream(base_stream + k as u64);
            let c = simulate_counts(&probs, &src, &det, &mut rng).unwrap();
            c.get(Channel::ZeroH) as f64 / c.total() as f64
        })
        .collect()
}

#[test]
fn acceptance_01_quantum_maximum() {
    let det = DetectorConfig::ideal(1_000_000.0 / SOURCE_RATE).unwrap();
    let outcome = sweep(&[FRAC_PI_4], &StateModel::ideal(), &det, 1);
    let s = outcome.points[0].s;
    let target = 2.0 * SQRT_2;
    let pass = (s - target).abs() <= 0.01;
    report(
        1,
        "quantum maximum",
        pass,
        &format!("S(α=π/4) = {s:.4} (target 2√2 = {target:.4} ± 0.01, 1e6 photons/setting)"),
    );
}

#[test]
fn acceptance_02_laser_curve() {
    let eta = 0.95;
    let alphas: Vec<f64> = theta_grid(25).iter().map(|t| 2.0 * t).collect();
    let det = DetectorConfig::bench_defaults(100_000.0 / SOURCE_RATE).unwrap();
    let model = StateModel {
        epsilon: 0.0,
        eta,
        xi: 0.0,
    };
    let outcome = sweep(&alphas, &model, &det, 2);
    let worst = max_sigma_residual(&outcome, 0.0, eta);
    // Grid point nearest θ = π/8 must violate the classical bound.
    let near = outcome
        .points
        .iter()
        .min_by(|a, b| {
            (a.theta - FRAC_PI_8)
                .abs()
                .total_cmp(&(b.theta - FRAC_PI_8).abs())
        })
        .unwrap();
    let pass = worst <= 3.0 && near.s > 2.0;
    report(
        2,
        "laser sweep η=0.95",
        pass,
        &format!(
            "max residual {worst:.2}σ (limit 3σ, 25 points × 1e5); S near θ=π/8 is {:.3} > 2",
            near.s
        ),
    );
}

#[test]
fn acceptance_03_led_and_halogen_curves() {
    let alphas: Vec<f64> = theta_grid(25).iter().map(|t| 2.0 * t).collect();
    let det = DetectorConfig::bench_defaults(100_000.0 / SOURCE_RATE).unwrap();
    let mut detail = String::new();
    let mut pass = true;
    for (k, eta) in [(0u64, 0.87), (1, 0.91)] {
        let model = StateModel {
            epsilon: 0.0,
            eta,
            xi: 0.0,
        };
        let outcome = run_chsh_sweep(
            &alphas,
            &model,
            EstimatorMode::FourChannel,
            &source(),
            &det,
            &RngFactory::new(ACCEPTANCE_SEED ^ 3 ^ (k << 32)),
        )
        .unwrap();
        let worst = max_sigma_residual(&outcome, 0.0, eta);
        let (_, s_max) = outcome.max_abs_s().unwrap();
        pass &= worst <= 3.0 && s_max > 2.0;
        detail.push_str(&format!(
            "η={eta}: residual {worst:.2}σ ≤ 3σ, max S {s_max:.3} > 2 (theory {:.3}); ",
            eta * 2.0 * SQRT_2
        ));
    }
    report(3, "LED/halogen sweeps", pass, detail.trim_end());
}

#[test]
fn acceptance_04_incoherent_regime() {
    // S sweep with the fitted state-quality scale.
    let eta = 0.89;
    let alphas: Vec<f64> = (0..100).map(|i| PI * i as f64 / 99.0).collect();
    let det = DetectorConfig::bench_defaults(20_000.0 / SOURCE_RATE).unwrap();
    let model = StateModel {
        epsilon: 1.0,
        eta,
        xi: 0.0,
    };
    let outcome = sweep(&alphas, &model, &det, 4);
    let mut worst_excess_sigma = f64::NEG_INFINITY;
    for p in &outcome.points {
        worst_excess_sigma = worst_excess_sigma.max((p.s.abs() - 2.0) / p.s_err);
    }
    let no_violation = worst_excess_sigma <= 3.0;

    // Analytic bound of the fully dephased state.
    let (_, s_max) = max_abs_theory_s(1.0, 1.0).unwrap();
    let analytic_ok = s_max <= 2.0 + 1e-12;

    // Fringe visibility of the ε = 1 state itself: full contrast at θ = 0,
    // none at θ = π/4.
    let rho = StateModel {
        epsilon: 1.0,
        eta: 1.0,
        xi: 0.0,
    }
    .density_matrix()
    .unwrap();
    let f = factory(40);
    let v0 = visibility(&mc_fringe(&rho, 0.0, 32, 50_000, &f, 0)).unwrap();
    let v45 = visibility(&mc_fringe(&rho, FRAC_PI_4, 32, 50_000, &f, 1000)).unwrap();
    let fringe_ok = v0 > 0.95 && v45 < 0.05;

    let pass = no_violation && analytic_ok && fringe_ok;
    report(
        4,
        "incoherent regime ε=1",
        pass,
        &format!(
            "max (|S|−2)/σ = {worst_excess_sigma:.2} ≤ 3 over 100 points; analytic max |S| = \
             {s_max:.6} ≤ 2; V(θ=0) = {v0:.3} > 0.95, V(θ=π/4) = {v45:.3} < 0.05"
        ),
    );
}

#[test]
fn acceptance_05_coherence_scales() {
    let narrow = SpectralProfile::new(3547.24e12, 6.5e12).unwrap();
    let broad = SpectralProfile::new(3611.4e12, 134.0e12).unwrap();
    let tau = narrow.coherence_time();
    let lc = narrow.coherence_length();
    let lc_broad = broad.coherence_length();
    let pass = (tau - 154e-15).abs() <= 2e-15
        && (lc - 46.0e-6).abs() <= 0.5e-6
        && (lc_broad - 2.23e-6).abs() <= 0.05e-6;
    report(
        5,
        "coherence scales",
        pass,
        &format!(
            "σ_ω=6.5e12: τ_c = {:.2} fs (154 ± 2), l_c = {:.2} μm (46.0 ± 0.5); σ_ω=134e12: \
             l_c = {:.3} μm (2.23 ± 0.05)",
            tau * 1e15,
            lc * 1e6,
            lc_broad * 1e6
        ),
    );
}

#[test]
fn acceptance_06_visibility_constancy() {
    let rho = StateModel::ideal().density_matrix().unwrap();
    let f = factory(6);
    let mut detail = String::from("ε=0 fringe visibilities: ");
    let mut pass = true;
    for (k, theta) in [0.0, FRAC_PI_8, FRAC_PI_4].into_iter().enumerate() {
        let v = visibility(&mc_fringe(&rho, theta, 64, 50_000, &f, 10_000 * k as u64)).unwrap();
        pass &= (v - 1.0).abs() <= 0.02;
        detail.push_str(&format!("V(θ={theta:.3}) = {v:.4}; "));
    }
    detail.push_str("target 1.00 ± 0.02");
    report(6, "visibility constancy", pass, &detail);
}

#[test]
fn acceptance_07_oracle_equivalences() {
    // Multinomial law vs. exhaustive permutation enumeration, n ≤ 6.
    let mut rng = factory(7).stream(0);
    let mut worst_multinomial: f64 = 0.0;
    for _ in 0..10 {
        let raw: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>() + 1e-3);
        let sum: f64 = raw.iter().sum();
        let p = ChannelProbabilities::new(raw.map(|x| x / sum)).unwrap();
        for n in 0..=6 {
            for outcome in enumerate_outcomes(n) {
                let fast = multinomial_outcome_probability(&outcome, &p);
                let brute = brute_force_outcome_probability(&outcome, &p).unwrap();
                worst_multinomial = worst_multinomial.max((fast - brute).abs());
            }
        }
    }

    // Analytic ε(T) vs. quadrature of the interference amplitude.
    let profile = SpectralProfile::new(3611.4e12, 134.0e12).unwrap();
    let mut worst_epsilon: f64 = 0.0;
    for i in 0..=16 {
        let delay = 0.25 * i as f64 / profile.sigma_omega();
        let quad = profile.interference_integral_quadrature(delay).unwrap();
        let analytic = 1.0 - profile.epsilon_from_delay(delay);
        worst_epsilon = worst_epsilon.max((quad.norm() - analytic).abs());
    }

    // Closed-form S vs. the full density-matrix pipeline on 500 points.
    let mut worst_s: f64 = 0.0;
    for i in 0..500 {
        let alpha = PI * i as f64 / 499.0;
        let epsilon = (i % 5) as f64 / 4.0;
        let eta = 0.5 + 0.5 * ((i % 7) as f64 / 6.0);
        let a = pipeline_s(alpha, epsilon, eta, 0.0).unwrap();
        let b = theory_s(alpha, epsilon, eta).unwrap();
        worst_s = worst_s.max((a - b).abs());
    }

    let pass = worst_multinomial <= 1e-12 && worst_epsilon <= 1e-3 && worst_s <= 1e-12;
    report(
        7,
        "oracle equivalences",
        pass,
        &format!(
            "multinomial ≡ enumeration: {worst_multinomial:.2e} ≤ 1e-12; |I_quad| ≡ 1−ε: \
             {worst_epsilon:.2e} ≤ 1e-3 (Tσ ∈ [0,4]); pipeline ≡ closed form: {worst_s:.2e} \
             ≤ 1e-12 (500 points)"
        ),
    );
}

#[test]
fn acceptance_08_coherent_incoherent_indistinguishability() {
    let mut rng = factory(8).stream(0);
    let max_n = 40u32;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mean = 0.1 + 5.9 * rng.random::<f64>();
        let coherent = coherent_amplitude_weights(mean, max_n).unwrap();
        let law = PhotonNumberLaw::Poissonian { mean };
        let poisson: Vec<f64> = (0..=max_n).map(|n| photon_number_pmf(&law, n)).collect();
        // A random number-commuting test: any bounded function of n.
        let test: Vec<f64> = (0..=max_n)
            .map(|_| 2.0 * rng.random::<f64>() - 1.0)
            .collect();
        let a = mixture_expectation(&coherent, &test).unwrap();
        let b = mixture_expectation(&poisson, &test).unwrap();
        worst = worst.max((a - b).abs());
    }
    let pass = worst <= 1e-12;
    report(
        8,
        "coherent/incoherent indistinguishability",
        pass,
        &format!("max |⟨f⟩_|C|² − ⟨f⟩_Poisson| = {worst:.2e} ≤ 1e-12 over 20 random tests"),
    );
}

#[test]
fn acceptance_09_loss_robustness() {
    let setting = MeasurementSetting::new(0.0, FRAC_PI_8).unwrap();
    let rho = StateModel::ideal().density_matrix().unwrap();
    let probs = measurement_probabilities(&rho, &setting);
    let src = source();
    let duration = 1_000_000.0 / SOURCE_RATE;
    let f = factory(9);
    let run = |efficiency: f64, stream: u64| {
        let det =
            DetectorConfig::new([efficiency; 4], [0.0; 4], 0.0, 1e-9, duration).unwrap();
        let counts = simulate_counts(&probs, &src, &det, &mut f.stream(stream)).unwrap();
        spe_core::bell::correlation_with_error(&counts, EstimatorMode::FourChannel).unwrap()
    };
    let (e_thin, se_thin) = run(0.52, 0);
    let (e_full, se_full) = run(1.0, 1);
    let combined = (se_thin * se_thin + se_full * se_full).sqrt();
    let diff = (e_thin - e_full).abs();
    let pass = diff < 5.0 * combined;
    report(
        9,
        "loss robustness",
        pass,
        &format!(
            "|Ê(0.52) − Ê(1.00)| = {diff:.2e} < 5σ = {:.2e} at 1e6 photons (Ê = {e_thin:.4} vs \
             {e_full:.4})",
            5.0 * combined
        ),
    );
}
