//! Optical elements of the single-photon two-qubit bench: the momentum
//! analyzer (beam-displacer interferometer with phase φ), the polarization
//! analyzer (half-wave plate inducing rotation θ), Bell-state generation and
//! projective readout.
//!
//! Angle convention: φ is the momentum-qubit *Bloch* rotation (the state
//! rotation uses φ/2), while θ is the *state* rotation of polarization (the
//! Bloch rotation is 2θ, and a wave plate with fast axis at ϑ induces
//! θ = 2ϑ). With these conventions the ideal Bell-state correlation is
//! E(φ, θ) = cos(φ − 2θ).

use crate::qstate::{Channel, ChannelProbabilities, DensityMatrix, LocalUnitary, StateVector};
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use thiserror::Error;

/// Errors from optical-element construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    /// An angle argument is NaN or infinite.
    #[error("angle argument is not finite")]
    NonFiniteAngle,
}

fn require_finite(angles: &[f64]) -> Result<(), OpticsError> {
    if angles.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(OpticsError::NonFiniteAngle)
    }
}

fn reduce(angle: f64) -> f64 {
    angle.rem_euclid(TAU)
}

/// One joint measurement setting: momentum phase φ, polarization rotation θ,
/// and a residual generation phase ξ between the two momentum paths
/// (ξ = 0 for a compensated interferometer).
///
/// Angles are stored reduced to [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    phi: f64,
    theta: f64,
    xi: f64,
}

impl MeasurementSetting {
    /// Compensated setting (ξ = 0).
    pub fn new(phi: f64, theta: f64) -> Result<MeasurementSetting, OpticsError> {
        MeasurementSetting::with_xi(phi, theta, 0.0)
    }

    /// Setting with an explicit residual generation phase.
    pub fn with_xi(phi: f64, theta: f64, xi: f64) -> Result<MeasurementSetting, OpticsError> {
        require_finite(&[phi, theta, xi])?;
        Ok(MeasurementSetting {
            phi: reduce(phi),
            theta: reduce(theta),
            xi: reduce(xi),
        })
    }

    /// Momentum Bloch phase φ.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Polarization rotation angle θ.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Residual generation phase ξ.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Both analyzer angles on the Bloch sphere: (φ, 2θ).
    pub fn bloch_angles(&self) -> (f64, f64) {
        (self.phi, 2.0 * self.theta)
    }
}

/// A half-wave plate described by its fast-axis angle ϑ; it rotates linear
/// polarization by θ = 2ϑ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HwpConfig {
    fast_axis_angle: f64,
}

impl HwpConfig {
    pub fn new(fast_axis_angle: f64) -> Result<HwpConfig, OpticsError> {
        require_finite(&[fast_axis_angle])?;
        Ok(HwpConfig {
            fast_axis_angle: reduce(fast_axis_angle),
        })
    }

    /// Fast-axis angle ϑ.
    pub fn fast_axis_angle(&self) -> f64 {
        self.fast_axis_angle
    }

    /// Induced polarization rotation θ = 2ϑ.
    pub fn rotation_angle(&self) -> f64 {
        2.0 * self.fast_axis_angle
    }

    /// The polarization-qubit unitary implemented by this plate.
    pub fn unitary(&self) -> Matrix2<Complex64> {
        polarization_rotation_unitary(self.rotation_angle())
    }
}

fn real2(m00: f64, m01: f64, m10: f64, m11: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(m00, 0.0),
        Complex64::new(m01, 0.0),
        Complex64::new(m10, 0.0),
        Complex64::new(m11, 0.0),
    )
}

/// Momentum-analyzer unitary for Bloch phase φ, in the (|0⟩, |1⟩) basis:
///
/// U(φ)|0⟩ = cos(φ/2)|0⟩ − sin(φ/2)|1⟩,
/// U(φ)|1⟩ = cos(φ/2)|1⟩ + sin(φ/2)|0⟩.
pub fn momentum_rotation_unitary(phi: f64) -> Matrix2<Complex64> {
    let (s, c) = (0.5 * phi).sin_cos();
    real2(c, s, -s, c)
}

/// Polarization rotation by θ in the (|V⟩, |H⟩) basis:
///
/// U(θ)|V⟩ = cos θ|V⟩ + sin θ|H⟩,
/// U(θ)|H⟩ = cos θ|H⟩ − sin θ|V⟩.
pub fn polarization_rotation_unitary(theta: f64) -> Matrix2<Complex64> {
    let (s, c) = theta.sin_cos();
    real2(c, -s, s, c)
}

/// Phase element for a residual generation phase ξ on the |0⟩ momentum path.
fn generation_phase(xi: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::from_polar(1.0, xi),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    )
}

/// The full analyzer unitary for one setting:
/// `U_momentum(φ)·P(ξ) ⊗ U_polarization(θ)`.
///
/// Measuring the compensated Bell state through a setting with residual
/// phase ξ is identical to measuring the ξ-phased Bell state through the
/// compensated setting.
pub fn setting_unitary(s: &MeasurementSetting) -> LocalUnitary {
    let m = momentum_rotation_unitary(s.phi()) * generation_phase(s.xi());
    LocalUnitary::new(m, polarization_rotation_unitary(s.theta()))
        .expect("rotation blocks are unitary by construction")
}

/// The single-photon Bell-type state (e^{iξ}|0H⟩ + |1V⟩)/√2 produced by the
/// generation stage; ξ = 0 corresponds to a compensated setup.
pub fn generate_bell_state(xi: f64) -> Result<StateVector, OpticsError> {
    require_finite(&[xi])?;
    let zero = Complex64::new(0.0, 0.0);
    StateVector::new([
        zero,
        Complex64::from_polar(FRAC_1_SQRT_2, xi),
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        zero,
    ])
    .map_err(|_| OpticsError::NonFiniteAngle)
}

/// The compensated Bell state, `generate_bell_state(0)`.
pub fn bell_state() -> StateVector {
    generate_bell_state(0.0).expect("0 is finite")
}

/// Propagates a state through the analyzers of one setting: U ρ U†.
pub fn prepare_state(rho_in: &DensityMatrix, s: &MeasurementSetting) -> DensityMatrix {
    setting_unitary(s).apply(rho_in)
}

/// Detection probabilities of `rho_in` measured at setting `s`: the diagonal
/// of the propagated state in the fixed detection basis.
pub fn measurement_probabilities(rho_in: &DensityMatrix, s: &MeasurementSetting) -> ChannelProbabilities {
    prepare_state(rho_in, s).channel_probabilities()
}

/// A dichotomic outcome label, ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    /// +1.0 or −1.0.
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// Detection-basis momentum projector: +1 ↦ |0⟩⟨0|, −1 ↦ |1⟩⟨1|.
pub fn momentum_projector(o: Outcome) -> Matrix2<Complex64> {
    match o {
        Outcome::Plus => real2(1.0, 0.0, 0.0, 0.0),
        Outcome::Minus => real2(0.0, 0.0, 0.0, 1.0),
    }
}

/// Detection-basis polarization projector: +1 ↦ |H⟩⟨H|, −1 ↦ |V⟩⟨V|.
///
/// (The −1 outcome projects onto the *polarization* state |V⟩; a published
/// statement of this projector mislabels it with a momentum ket.)
pub fn polarization_projector(o: Outcome) -> Matrix2<Complex64> {
    match o {
        Outcome::Plus => real2(0.0, 0.0, 0.0, 1.0),
        Outcome::Minus => real2(1.0, 0.0, 0.0, 0.0),
    }
}

/// The pair of dichotomic outcomes a channel represents:
/// (momentum, polarization).
pub fn channel_outcomes(ch: Channel) -> (Outcome, Outcome) {
    let m = if ch.momentum_sign() > 0.0 { Outcome::Plus } else { Outcome::Minus };
    let p = if ch.polarization_sign() > 0.0 { Outcome::Plus } else { Outcome::Minus };
    (m, p)
}

/// The four joint projectors of one setting, rotated into the analyzer frame:
/// Π(x, y) = U† (P_x ⊗ P_y) U with U the setting unitary.
///
/// `Tr[ρ·Π(x, y)]` equals the corresponding channel probability of
/// [`measurement_probabilities`]; both routes are kept because their
/// agreement is a self-check of the measurement model.
#[derive(Debug, Clone)]
pub struct RotatedProjectors {
    u: Matrix4<Complex64>,
}

impl RotatedProjectors {
    pub fn for_setting(s: &MeasurementSetting) -> RotatedProjectors {
        RotatedProjectors {
            u: setting_unitary(s).full(),
        }
    }

    /// Π(x, y) for a pair of dichotomic outcomes.
    pub fn joint(&self, momentum: Outcome, polarization: Outcome) -> Matrix4<Complex64> {
        let k = momentum_projector(momentum).kronecker(&polarization_projector(polarization));
        let p = Matrix4::from_iterator(k.iter().copied());
        self.u.adjoint() * p * self.u
    }

    /// Π for the channel's outcome pair.
    pub fn channel(&self, ch: Channel) -> Matrix4<Complex64> {
        let (m, p) = channel_outcomes(ch);
        self.joint(m, p)
    }

    /// Detection probability Tr[ρ·Π(ch)].
    pub fn probability(&self, rho: &DensityMatrix, ch: Channel) -> f64 {
        (rho.matrix() * self.channel(ch)).trace().re
    }
}
