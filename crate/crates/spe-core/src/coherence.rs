//! Spectral coherence and decoherence of the momentum qubit.
//!
//! A photon with a Gaussian spectral density of width σ_ω has coherence time
//! τ_c = 1/σ_ω and coherence length l_c = c/σ_ω. A path-length imbalance
//! between the two momentum modes suppresses their mutual coherence by the
//! envelope g(T) = exp(−T²σ_ω²/2); the decoherence parameter ε = 1 − g
//! interpolates between the pure Bell-type state (ε = 0) and the fully
//! dephased mixture (ε = 1).
//!
//! Two ε entry points are provided. [`SpectralProfile::epsilon_from_delay`]
//! is the Fourier-transform result in the time delay T. The path-difference
//! form [`SpectralProfile::epsilon_from_path_difference`] follows the
//! published convention for interferometer arm imbalance,
//! ε(ΔL) = 1 − exp(−ΔL²/l_c²); note its exponent carries no ½, so the two
//! parametrizations deliberately differ by a factor of two under ΔL = cT.

use crate::constants::SPEED_OF_LIGHT;
use crate::qstate::{DensityMatrix, QStateError};
use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
use thiserror::Error;

/// Errors from spectral-profile construction and coherence computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoherenceError {
    /// Center frequency or width is not positive and finite.
    #[error("spectral profile requires finite ω₀ > 0 and σ_ω > 0")]
    InvalidProfile,
    /// The narrowband assumption ω₀ ≫ σ_ω is violated.
    #[error("profile is not narrowband: ω₀/σ_ω = {ratio:.3} (need > {min:.0})")]
    NotNarrowband { ratio: f64, min: f64 },
    /// Filter parameters are unphysical or too broadband.
    #[error("invalid filter: need 0 < bandwidth < wavelength/10 and wavelength > 0")]
    InvalidFilter,
    /// Fringe amplitude outside (0, 1].
    #[error("fringe amplitude {value} outside (0, 1]")]
    AmplitudeOutOfRange { value: f64 },
    /// Decoherence parameter outside [0, 1].
    #[error("decoherence parameter ε = {value} outside [0, 1]")]
    EpsilonOutOfRange { value: f64 },
    /// State-quality parameter outside [0, 1].
    #[error("state-quality parameter η = {value} outside [0, 1]")]
    EtaOutOfRange { value: f64 },
    /// A non-finite argument was passed.
    #[error("argument is not finite")]
    NonFinite,
    /// The observable block passed to a detection probability is invalid.
    #[error("observable is not Hermitian: {0}")]
    InvalidObservable(#[from] QStateError),
    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed to reach tolerance {requested:.1e} (error estimate {achieved:.1e})")]
    QuadratureFailure { requested: f64, achieved: f64 },
}

/// Minimum narrowband ratio ω₀/σ_ω accepted by [`SpectralProfile`].
pub const MIN_NARROWBAND_RATIO: f64 = 10.0;

/// Absolute tolerance of the interference-integral quadrature oracle.
pub const QUADRATURE_TOL: f64 = 1e-9;

/// How many σ_ω on each side of ω₀ the quadrature window spans. The
/// truncated Gaussian mass outside ±8σ is ~1e−15, negligible against
/// [`QUADRATURE_TOL`].
pub const QUADRATURE_WINDOW_SIGMAS: f64 = 8.0;

/// A Gaussian spectral density with center ω₀ and width σ_ω (rad/s), plus a
/// fringe amplitude A ∈ (0, 1] describing residual experimental contrast in
/// autocorrelation fringes (A = 1 for an ideal bench).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralProfile {
    omega0: f64,
    sigma_omega: f64,
    amplitude: f64,
}

impl SpectralProfile {
    /// Profile with ideal fringe amplitude A = 1.
    pub fn new(omega0: f64, sigma_omega: f64) -> Result<SpectralProfile, CoherenceError> {
        SpectralProfile::with_amplitude(omega0, sigma_omega, 1.0)
    }

    /// Profile with an explicit fringe amplitude.
    pub fn with_amplitude(
        omega0: f64,
        sigma_omega: f64,
        amplitude: f64,
    ) -> Result<SpectralProfile, CoherenceError> {
        if !omega0.is_finite() || !sigma_omega.is_finite() || omega0 <= 0.0 || sigma_omega <= 0.0 {
            return Err(CoherenceError::InvalidProfile);
        }
        let ratio = omega0 / sigma_omega;
        if ratio <= MIN_NARROWBAND_RATIO {
            return Err(CoherenceError::NotNarrowband {
                ratio,
                min: MIN_NARROWBAND_RATIO,
            });
        }
        if !amplitude.is_finite() || amplitude <= 0.0 || amplitude > 1.0 {
            return Err(CoherenceError::AmplitudeOutOfRange { value: amplitude });
        }
        Ok(SpectralProfile {
            omega0,
            sigma_omega,
            amplitude,
        })
    }

    /// Profile of a filtered broadband source: center wavelength λ and a
    /// Gaussian wavelength width Δλ (both meters) map to
    /// ω₀ = 2πc/λ and σ_ω = 2πc·Δλ/λ².
    ///
    /// Quoted filter bandwidths are treated as the Gaussian σ in wavelength;
    /// fitted σ_ω values from measured fringes can be passed to
    /// [`SpectralProfile::new`] directly when higher fidelity is needed.
    pub fn from_filter(
        center_wavelength: f64,
        bandwidth: f64,
    ) -> Result<SpectralProfile, CoherenceError> {
        if !center_wavelength.is_finite()
            || !bandwidth.is_finite()
            || center_wavelength <= 0.0
            || bandwidth <= 0.0
            || bandwidth >= center_wavelength / MIN_NARROWBAND_RATIO
        {
            return Err(CoherenceError::InvalidFilter);
        }
        let omega0 = std::f64::consts::TAU * SPEED_OF_LIGHT / center_wavelength;
        let sigma_omega =
            std::f64::consts::TAU * SPEED_OF_LIGHT * bandwidth / (center_wavelength * center_wavelength);
        SpectralProfile::new(omega0, sigma_omega)
    }

    /// Center frequency ω₀ (rad/s).
    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Spectral width σ_ω (rad/s).
    pub fn sigma_omega(&self) -> f64 {
        self.sigma_omega
    }

    /// Fringe amplitude A.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Normalized spectral density f(ω).
    pub fn density(&self, omega: f64) -> f64 {
        let z = (omega - self.omega0) / self.sigma_omega;
        (-0.5 * z * z).exp() / (self.sigma_omega * (std::f64::consts::TAU).sqrt())
    }

    /// Coherence time τ_c = 1/σ_ω (seconds).
    pub fn coherence_time(&self) -> f64 {
        1.0 / self.sigma_omega
    }

    /// Coherence length l_c = c/σ_ω (meters).
    pub fn coherence_length(&self) -> f64 {
        SPEED_OF_LIGHT / self.sigma_omega
    }

    /// Coherence envelope g(T) = exp(−T²σ_ω²/2) at time delay T.
    pub fn envelope(&self, delay: f64) -> f64 {
        let x = delay * self.sigma_omega;
        (-0.5 * x * x).exp()
    }

    /// Decoherence parameter from a time delay: ε(T) = 1 − exp(−T²σ_ω²/2).
    pub fn epsilon_from_delay(&self, delay: f64) -> f64 {
        1.0 - self.envelope(delay)
    }

    /// Decoherence parameter from a path-length imbalance, in the published
    /// arm-imbalance convention: ε(ΔL) = 1 − exp(−ΔL²/l_c²).
    pub fn epsilon_from_path_difference(&self, delta_l: f64) -> f64 {
        let x = delta_l / self.coherence_length();
        1.0 - (-x * x).exp()
    }

    /// Analytic interference integral
    /// I(T) = ∫ e^{iTω} f(ω) dω = e^{iω₀T}·g(T).
    ///
    /// Its modulus is the fringe amplitude 1 − ε(T); its real part carries
    /// the carrier oscillation cos(ω₀T).
    pub fn interference_integral(&self, delay: f64) -> Complex64 {
        Complex64::from_polar(self.envelope(delay), self.omega0 * delay)
    }

    /// Quadrature oracle for [`SpectralProfile::interference_integral`]:
    /// adaptive Gauss–Kronrod integration of e^{iTω}f(ω) over
    /// ω₀ ± [`QUADRATURE_WINDOW_SIGMAS`]·σ_ω to absolute tolerance
    /// [`QUADRATURE_TOL`] per component.
    pub fn interference_integral_quadrature(&self, delay: f64) -> Result<Complex64, CoherenceError> {
        if !delay.is_finite() {
            return Err(CoherenceError::NonFinite);
        }
        let a = self.omega0 - QUADRATURE_WINDOW_SIGMAS * self.sigma_omega;
        let b = self.omega0 + QUADRATURE_WINDOW_SIGMAS * self.sigma_omega;
        let f = |omega: f64| {
            Complex64::from_polar(1.0, delay * omega) * self.density(omega)
        };
        adaptive_gauss_kronrod(&f, a, b, QUADRATURE_TOL, MAX_QUADRATURE_INTERVALS)
    }
}

/// The partially dephased Bell-type state
/// ρ_ε = (1−ε)|ψ_ξ⟩⟨ψ_ξ| + ε·ρ_mixed: equal 1/2 populations on |0H⟩ and
/// |1V⟩ with off-diagonal coherence (1−ε)e^{iξ}/2.
pub fn rho_epsilon(epsilon: f64, xi: f64) -> Result<DensityMatrix, CoherenceError> {
    if !epsilon.is_finite() || !(0.0..=1.0).contains(&epsilon) {
        return Err(CoherenceError::EpsilonOutOfRange { value: epsilon });
    }
    if !xi.is_finite() {
        return Err(CoherenceError::NonFinite);
    }
    let mut m = Matrix4::<Complex64>::zeros();
    m[(1, 1)] = Complex64::new(0.5, 0.0);
    m[(2, 2)] = Complex64::new(0.5, 0.0);
    let coh = Complex64::from_polar(0.5 * (1.0 - epsilon), xi);
    m[(1, 2)] = coh;
    m[(2, 1)] = coh.conj();
    Ok(DensityMatrix::from_matrix(m).expect("rho_epsilon is a valid density matrix"))
}

/// The fully dephased limit ρ_mixed = rho_epsilon(1, ·): classical 50/50
/// populations with no momentum coherence.
pub fn mixed_state() -> DensityMatrix {
    rho_epsilon(1.0, 0.0).expect("epsilon = 1 is in range")
}

/// State-quality (visibility) degradation: ρ^eff = η·ρ + (1−η)·𝟙/4.
pub fn effective_state(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix, CoherenceError> {
    if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
        return Err(CoherenceError::EtaOutOfRange { value: eta });
    }
    Ok(DensityMatrix::convex_mix(rho, &DensityMatrix::maximally_mixed(), eta)
        .expect("eta checked in range"))
}

/// Which of the two interferometer output arms a detection probability
/// refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorArm {
    /// Constructive arm at zero delay.
    Zero,
    /// Destructive arm at zero delay.
    One,
}

impl DetectorArm {
    fn parity(self) -> f64 {
        match self {
            DetectorArm::Zero => 1.0,
            DetectorArm::One => -1.0,
        }
    }
}

fn hermitian_check(q: &Matrix2<Complex64>) -> Result<(), CoherenceError> {
    if q.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CoherenceError::NonFinite);
    }
    let defect = (q - q.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > crate::qstate::OPERATOR_TOL {
        return Err(CoherenceError::InvalidObservable(QStateError::NotHermitian { defect }));
    }
    Ok(())
}

/// Wave-packet detection probability behind the recombining interferometer.
///
/// For a polarization observable Q (Hermitian; a projector or POVM element
/// for physical probabilities), reference polarization |V⟩ in one arm and
/// the rotated |θ⟩ = cos θ|V⟩ + sin θ|H⟩ in the other, time delay T between
/// the arms:
///
/// P_j = ¼·[⟨V|Q|V⟩ + ⟨θ|Q|θ⟩ ± 2·Re(c_Q·I(T))],   c_Q = ⟨V|Q|θ⟩,
///
/// with I(T) the interference integral; the analytic route uses
/// Re(c_Q·I) = |c_Q|·cos(ω₀T + arg c_Q)·exp(−T²σ_ω²/2).
pub fn precise_detection_probability(
    arm: DetectorArm,
    q: &Matrix2<Complex64>,
    theta: f64,
    delay: f64,
    profile: &SpectralProfile,
) -> Result<f64, CoherenceError> {
    if !theta.is_finite() || !delay.is_finite() {
        return Err(CoherenceError::NonFinite);
    }
    hermitian_check(q)?;
    let interference = profile.interference_integral(delay);
    Ok(precise_probability_with_integral(arm, q, theta, interference))
}

/// Same probability with the interference integral evaluated by the
/// quadrature oracle instead of the closed form.
pub fn precise_detection_probability_quadrature(
    arm: DetectorArm,
    q: &Matrix2<Complex64>,
    theta: f64,
    delay: f64,
    profile: &SpectralProfile,
) -> Result<f64, CoherenceError> {
    if !theta.is_finite() || !delay.is_finite() {
        return Err(CoherenceError::NonFinite);
    }
    hermitian_check(q)?;
    let interference = profile.interference_integral_quadrature(delay)?;
    Ok(precise_probability_with_integral(arm, q, theta, interference))
}

fn precise_probability_with_integral(
    arm: DetectorArm,
    q: &Matrix2<Complex64>,
    theta: f64,
    interference: Complex64,
) -> f64 {
    let v = Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let t = Vector2::new(
        Complex64::new(theta.cos(), 0.0),
        Complex64::new(theta.sin(), 0.0),
    );
    let qvv = (v.adjoint() * q * v)[(0, 0)].re;
    let qtt = (t.adjoint() * q * t)[(0, 0)].re;
    let c_q = (v.adjoint() * q * t)[(0, 0)];
    0.25 * (qvv + qtt + arm.parity() * 2.0 * (c_q * interference).re)
}

/// One point of a white-light autocorrelation scan.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AutocorrPoint {
    /// Path-length imbalance ΔL (meters).
    pub delta_l: f64,
    /// Normalized detection probability in the constructive arm.
    pub probability: f64,
}

/// White-light interferogram of a profile over a ΔL grid:
///
/// P(ΔL) = ½·[1 + A·cos(ω₀ΔL/c)·exp(−ΔL²/(2l_c²))].
///
/// The fringe carrier has period λ = 2πc/ω₀ and the envelope decays on the
/// coherence length; fitting A, ω₀ and l_c to a measured scan is how the
/// fitted profile parameters are obtained.
pub fn autocorrelation_curve(profile: &SpectralProfile, delta_l: &[f64]) -> Vec<AutocorrPoint> {
    let l_c = profile.coherence_length();
    delta_l
        .iter()
        .map(|&dl| {
            let envelope = (-dl * dl / (2.0 * l_c * l_c)).exp();
            let carrier = (profile.omega0() * dl / SPEED_OF_LIGHT).cos();
            AutocorrPoint {
                delta_l: dl,
                probability: 0.5 * (1.0 + profile.amplitude() * carrier * envelope),
            }
        })
        .collect()
}

// --- adaptive Gauss–Kronrod quadrature -------------------------------------

/// Interval budget for the adaptive quadrature; smooth Gaussian integrands
/// converge in far fewer.
pub const MAX_QUADRATURE_INTERVALS: usize = 4096;

/// 15-point Kronrod abscissae on [−1, 1] (non-negative half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
/// Kronrod weights matching [`XGK`].
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
/// Embedded 7-point Gauss weights (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 evaluation on [a, b]: returns (K15 estimate, |K15 − G7|).
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = Complex64::new(0.0, 0.0);
    let mut gauss = Complex64::new(0.0, 0.0);
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (lo, hi) = (f(mid - half * x), f(mid + half * x));
        let pair = if x == 0.0 { lo } else { lo + hi };
        kronrod += wk * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        } else if x == 0.0 {
            gauss += WG[3] * pair;
        }
    }
    // XGK[7] = 0 sits at i = 7 (odd), so the center point is already
    // accumulated once into both rules; the `x == 0.0` arm above is never
    // taken for this table but keeps the rule correct for any layout.
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// Globally adaptive bisection on the K15 error estimate.
fn adaptive_gauss_kronrod<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<Complex64, CoherenceError> {
    struct Seg {
        a: f64,
        b: f64,
        value: Complex64,
        err: f64,
    }
    let (value, err) = gk15(f, a, b);
    let mut segs = vec![Seg { a, b, value, err }];
    loop {
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        if total_err <= tol {
            return Ok(segs.iter().map(|s| s.value).sum());
        }
        if segs.len() >= max_intervals {
            return Err(CoherenceError::QuadratureFailure {
                requested: tol,
                achieved: total_err,
            });
        }
        // Split the segment with the largest error estimate.
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).expect("finite errors"))
            .map(|(i, _)| i)
            .expect("non-empty segment list");
        let seg = segs.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        for (lo, hi) in [(seg.a, mid), (mid, seg.b)] {
            let (value, err) = gk15(f, lo, hi);
            segs.push(Seg { a: lo, b: hi, value, err });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Fitted profile of the 1 nm-filtered thermal sources.
    fn narrow() -> SpectralProfile {
        SpectralProfile::new(3547.24e12, 6.5e12).unwrap()
    }

    /// Fitted profile of the unfiltered broadband source.
    fn broad() -> SpectralProfile {
        SpectralProfile::new(3611.4e12, 134.0e12).unwrap()
    }

    #[test]
    fn coherence_scales_of_fitted_profiles() {
        let p = narrow();
        assert!((p.coherence_time() - 153.846e-15).abs() < 0.5e-15);
        assert!((p.coherence_length() - 46.12e-6).abs() < 0.05e-6);
        let b = broad();
        assert!((b.coherence_time() - 7.46e-15).abs() < 0.05e-15);
        assert!((b.coherence_length() - 2.237e-6).abs() < 0.005e-6);
    }

    #[test]
    fn filter_conversion_matches_narrowband_formulas() {
        // 1 nm Gaussian width at 531 nm.
        let p = SpectralProfile::from_filter(531e-9, 1e-9).unwrap();
        let expect_omega0 = std::f64::consts::TAU * SPEED_OF_LIGHT / 531e-9;
        let expect_sigma = expect_omega0 / 531.0;
        assert!((p.omega0() - expect_omega0).abs() / expect_omega0 < 1e-12);
        assert!((p.sigma_omega() - expect_sigma).abs() / expect_sigma < 1e-12);
        // Order of magnitude agrees with the fitted width for the same filter.
        assert!(p.sigma_omega() > 5e12 && p.sigma_omega() < 8e12);
    }

    #[test]
    fn profile_validation() {
        assert!(matches!(
            SpectralProfile::new(-1.0, 1.0),
            Err(CoherenceError::InvalidProfile)
        ));
        assert!(matches!(
            SpectralProfile::new(5.0, 1.0),
            Err(CoherenceError::NotNarrowband { .. })
        ));
        assert!(matches!(
            SpectralProfile::from_filter(531e-9, 100e-9),
            Err(CoherenceError::InvalidFilter)
        ));
        assert!(matches!(
            SpectralProfile::with_amplitude(100.0, 1.0, 1.5),
            Err(CoherenceError::AmplitudeOutOfRange { .. })
        ));
    }

    #[test]
    fn epsilon_frozen_values() {
        let p = narrow();
        // One coherence time of delay.
        let t = p.coherence_time();
        assert!((p.epsilon_from_delay(t) - 0.393_469_340_287_366_6).abs() < 1e-12);
        // One coherence length of path imbalance (arm-imbalance convention).
        let l = p.coherence_length();
        assert!((p.epsilon_from_path_difference(l) - 0.632_120_558_828_557_7).abs() < 1e-12);
        assert_eq!(p.epsilon_from_delay(0.0), 0.0);
        assert_eq!(p.epsilon_from_path_difference(0.0), 0.0);
    }

    #[test]
    fn epsilon_is_symmetric_and_saturates() {
        let p = narrow();
        let big = 50.0 * p.coherence_time();
        assert!((p.epsilon_from_delay(big) - 1.0).abs() < 1e-12);
        assert!((p.epsilon_from_delay(-1e-13) - p.epsilon_from_delay(1e-13)).abs() < 1e-15);
    }

    #[test]
    fn rho_epsilon_structure_and_purity() {
        let rho = rho_epsilon(0.5, 0.0).unwrap();
        let m = rho.matrix();
        assert!((m[(1, 2)].re - 0.25).abs() < 1e-15);
        assert!((rho.purity() - 0.625).abs() < 1e-12);

        let pure = rho_epsilon(0.0, 0.0).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        let mixed = mixed_state();
        assert!((mixed.purity() - 0.5).abs() < 1e-12);
        assert!(mixed.matrix()[(1, 2)].norm() < 1e-15);

        assert!(matches!(
            rho_epsilon(1.2, 0.0),
            Err(CoherenceError::EpsilonOutOfRange { .. })
        ));
    }

    #[test]
    fn effective_state_purity_frozen_value() {
        let rho = effective_state(&rho_epsilon(0.0, 0.0).unwrap(), 0.95).unwrap();
        assert!((rho.purity() - 0.926875).abs() < 1e-12);
        assert!(matches!(
            effective_state(&mixed_state(), 1.1),
            Err(CoherenceError::EtaOutOfRange { .. })
        ));
    }

    #[test]
    fn precise_probability_limits() {
        let p = narrow();
        let id = Matrix2::<Complex64>::identity();
        // Zero delay, aligned polarizations: fully constructive/destructive.
        let p0 = precise_detection_probability(DetectorArm::Zero, &id, 0.0, 0.0, &p).unwrap();
        let p1 = precise_detection_probability(DetectorArm::One, &id, 0.0, 0.0, &p).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12);
        assert!(p1.abs() < 1e-12);
        // Far beyond the coherence time: both arms 1/2 (θ = 0).
        let far = 50.0 * p.coherence_time();
        let q0 = precise_detection_probability(DetectorArm::Zero, &id, 0.0, far, &p).unwrap();
        assert!((q0 - 0.5).abs() < 1e-10);
        // Crossed polarizations kill the interference entirely.
        let c0 =
            precise_detection_probability(DetectorArm::Zero, &id, 0.5 * PI, 0.0, &p).unwrap();
        assert!((c0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn precise_probability_rejects_non_hermitian() {
        let p = narrow();
        let mut q = Matrix2::<Complex64>::identity();
        q[(0, 1)] = Complex64::new(0.3, 0.1);
        assert!(matches!(
            precise_detection_probability(DetectorArm::Zero, &q, 0.0, 0.0, &p),
            Err(CoherenceError::InvalidObservable(_))
        ));
    }

    #[test]
    fn quadrature_matches_analytic_integral() {
        let p = narrow();
        for k in 0..=50 {
            let t = (k as f64 / 50.0) * 5.0 * p.coherence_time();
            let analytic = p.interference_integral(t);
            let quad = p.interference_integral_quadrature(t).unwrap();
            assert!(
                (analytic - quad).norm() < 1e-6,
                "T·σ = {}: analytic {analytic}, quadrature {quad}",
                t * p.sigma_omega()
            );
        }
    }

    #[test]
    fn quadrature_amplitude_recovers_one_minus_epsilon() {
        let p = broad();
        for k in 0..=40 {
            let t = (k as f64 / 40.0) * 4.0 * p.coherence_time();
            let amp = p.interference_integral_quadrature(t).unwrap().norm();
            assert!((amp - (1.0 - p.epsilon_from_delay(t))).abs() < 1e-3);
        }
    }

    #[test]
    fn quadrature_failure_on_tiny_budget() {
        let p = narrow();
        let f = |omega: f64| Complex64::from_polar(1.0, 1e-12 * omega) * p.density(omega);
        let r = adaptive_gauss_kronrod(
            &f,
            p.omega0() - 8.0 * p.sigma_omega(),
            p.omega0() + 8.0 * p.sigma_omega(),
            1e-30,
            2,
        );
        assert!(matches!(r, Err(CoherenceError::QuadratureFailure { .. })));
    }

    #[test]
    fn autocorrelation_fringe_shape() {
        let p = narrow();
        let lambda = std::f64::consts::TAU * SPEED_OF_LIGHT / p.omega0();
        let curve = autocorrelation_curve(&p, &[0.0, 0.5 * lambda, lambda, 1e-3]);
        assert!((curve[0].probability - 1.0).abs() < 1e-12);
        // Half a wavelength later: near-destructive (envelope ≈ 1 there).
        assert!(curve[1].probability < 0.01);
        assert!((curve[2].probability - 1.0).abs() < 0.01);
        // Far outside the coherence length: fringes wash out to 1/2.
        assert!((curve[3].probability - 0.5).abs() < 1e-9);
    }

    #[test]
    fn amplitude_scales_autocorrelation_contrast() {
        let p = SpectralProfile::with_amplitude(3547.24e12, 6.5e12, 0.985).unwrap();
        let curve = autocorrelation_curve(&p, &[0.0]);
        assert!((curve[0].probability - 0.5 * (1.0 + 0.985)).abs() < 1e-12);
    }

    proptest! {
        /// ε is monotone in |T| and stays in [0, 1).
        #[test]
        fn prop_epsilon_monotone(t1 in 0.0f64..5e-13, t2 in 0.0f64..5e-13) {
            let p = narrow();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let (e_lo, e_hi) = (p.epsilon_from_delay(lo), p.epsilon_from_delay(hi));
            prop_assert!((0.0..1.0).contains(&e_lo));
            prop_assert!(e_lo <= e_hi + 1e-15);
        }

        /// The two precise-probability arms always sum to 1 for Q = 𝟙.
        #[test]
        fn prop_precise_arms_sum_to_one(
            theta in -3.2f64..3.2,
            t_over_tau in 0.0f64..6.0,
        ) {
            let p = narrow();
            let id = Matrix2::<Complex64>::identity();
            let t = t_over_tau * p.coherence_time();
            let p0 = precise_detection_probability(DetectorArm::Zero, &id, theta, t, &p).unwrap();
            let p1 = precise_detection_probability(DetectorArm::One, &id, theta, t, &p).unwrap();
            prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p0));
        }
    }
}
