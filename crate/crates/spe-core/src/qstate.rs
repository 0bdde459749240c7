//! Two-qubit state algebra for a single photon carrying a momentum (path)
//! qubit and a polarization qubit.
//!
//! Basis order is fixed everywhere in the crate as
//! |0V⟩, |0H⟩, |1V⟩, |1H⟩ (momentum slow index, polarization fast index),
//! so a product operator acts as `momentum ⊗ polarization` via the Kronecker
//! product in that order.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use thiserror::Error;

/// Hilbert-space dimension of the combined momentum ⊗ polarization system.
pub const DIM: usize = 4;

/// Tolerance for Hermiticity, trace and unitarity checks on constructed
/// operators. Matrices built from double-precision rotations land well
/// inside this.
pub const OPERATOR_TOL: f64 = 1e-12;

/// Most negative eigenvalue accepted as "zero within rounding" when
/// validating positive semidefiniteness; anything below this is rejected,
/// anything in `[-EIGENVALUE_FLOOR, 0)` is clamped to zero.
pub const EIGENVALUE_FLOOR: f64 = 1e-10;

/// State vectors with norm below this are rejected as unnormalizable.
pub const MIN_NORM: f64 = 1e-12;

/// Errors from state and operator validation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    /// State vector norm is too small to normalize.
    #[error("state vector has (near-)zero norm and cannot be normalized")]
    ZeroNorm,
    /// An amplitude or matrix entry is NaN or infinite.
    #[error("non-finite entry in state or operator")]
    NonFinite,
    /// Matrix is not Hermitian within [`OPERATOR_TOL`].
    #[error("matrix is not Hermitian (max |m - m†| entry = {defect:.3e})")]
    NotHermitian { defect: f64 },
    /// Trace differs from 1 within [`OPERATOR_TOL`].
    #[error("density matrix trace = {trace:.17} differs from 1")]
    TraceNotOne { trace: f64 },
    /// An eigenvalue is more negative than [`EIGENVALUE_FLOOR`].
    #[error("density matrix has negative eigenvalue {eigenvalue:.3e}")]
    NotPositive { eigenvalue: f64 },
    /// A 2×2 block fails the unitarity check.
    #[error("operator block is not unitary (max |U†U - 1| entry = {defect:.3e})")]
    NotUnitary { defect: f64 },
    /// Convex mixing weight outside [0, 1].
    #[error("mixing weight {weight} outside [0, 1]")]
    WeightOutOfRange { weight: f64 },
    /// Probabilities that should sum to 1 do not.
    #[error("channel probabilities sum to {sum:.17}, expected 1")]
    ProbabilityNotNormalized { sum: f64 },
}

/// One of the four single-photon detection channels, in fixed basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Momentum |0⟩, polarization |V⟩.
    ZeroV = 0,
    /// Momentum |0⟩, polarization |H⟩.
    ZeroH = 1,
    /// Momentum |1⟩, polarization |V⟩.
    OneV = 2,
    /// Momentum |1⟩, polarization |H⟩.
    OneH = 3,
}

impl Channel {
    /// All channels in basis order.
    pub const ALL: [Channel; 4] = [Channel::ZeroV, Channel::ZeroH, Channel::OneV, Channel::OneH];

    /// Basis index in 0..4.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Channel for a basis index, if in range.
    pub fn from_index(i: usize) -> Option<Channel> {
        Channel::ALL.get(i).copied()
    }

    /// Short label, e.g. `"0V"`.
    pub fn label(self) -> &'static str {
        match self {
            Channel::ZeroV => "0V",
            Channel::ZeroH => "0H",
            Channel::OneV => "1V",
            Channel::OneH => "1H",
        }
    }

    /// Dichotomic outcome carried by the momentum qubit: +1 for |0⟩, −1 for |1⟩.
    pub fn momentum_sign(self) -> f64 {
        match self {
            Channel::ZeroV | Channel::ZeroH => 1.0,
            Channel::OneV | Channel::OneH => -1.0,
        }
    }

    /// Dichotomic outcome carried by the polarization qubit: +1 for |H⟩, −1 for |V⟩.
    pub fn polarization_sign(self) -> f64 {
        match self {
            Channel::ZeroH | Channel::OneH => 1.0,
            Channel::ZeroV | Channel::OneV => -1.0,
        }
    }

    /// Product of the two dichotomic outcomes; the weight this channel
    /// carries in a correlation estimate.
    pub fn correlation_sign(self) -> f64 {
        self.momentum_sign() * self.polarization_sign()
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

fn max_abs_entry(m: &Matrix4<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A normalized pure state of the momentum ⊗ polarization system.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vector4<Complex64>,
}

impl StateVector {
    /// Validates and normalizes a raw amplitude vector.
    ///
    /// Rejects non-finite entries and vectors of norm below [`MIN_NORM`];
    /// anything else is rescaled to unit norm.
    pub fn new(amps: [Complex64; 4]) -> Result<StateVector, QStateError> {
        Self::from_vector(Vector4::from_row_slice(&amps))
    }

    /// Same as [`StateVector::new`] for an `nalgebra` vector.
    pub fn from_vector(amps: Vector4<Complex64>) -> Result<StateVector, QStateError> {
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QStateError::NonFinite);
        }
        let norm = amps.norm();
        if norm < MIN_NORM {
            return Err(QStateError::ZeroNorm);
        }
        Ok(StateVector {
            amps: amps.unscale(norm),
        })
    }

    /// The normalized amplitudes in basis order.
    pub fn amplitudes(&self) -> &Vector4<Complex64> {
        &self.amps
    }

    /// Amplitude on one channel.
    pub fn amplitude(&self, ch: Channel) -> Complex64 {
        self.amps[ch.index()]
    }

    /// Detection probability in one channel, |amplitude|².
    pub fn probability(&self, ch: Channel) -> f64 {
        self.amplitude(ch).norm_sqr()
    }

    /// All four channel probabilities.
    pub fn probabilities(&self) -> ChannelProbabilities {
        let p = [
            self.probability(Channel::ZeroV),
            self.probability(Channel::ZeroH),
            self.probability(Channel::OneV),
            self.probability(Channel::OneH),
        ];
        ChannelProbabilities::new(p).expect("normalized state yields normalized probabilities")
    }

    /// The rank-one projector |ψ⟩⟨ψ| as a density matrix.
    pub fn projector(&self) -> DensityMatrix {
        let m = self.amps * self.amps.adjoint();
        DensityMatrix::from_matrix(m).expect("projector of a normalized state is a valid density matrix")
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        (self.amps.adjoint() * other.amps)[(0, 0)]
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// within documented tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: Matrix4<Complex64>,
}

impl DensityMatrix {
    /// Validates a raw matrix as a density matrix.
    ///
    /// Checks finiteness, Hermiticity within [`OPERATOR_TOL`], unit trace
    /// within [`OPERATOR_TOL`], and eigenvalues ≥ −[`EIGENVALUE_FLOOR`].
    /// The stored matrix is symmetrized, `(m + m†)/2`, so later spectral
    /// operations see an exactly Hermitian operator.
    pub fn from_matrix(m: Matrix4<Complex64>) -> Result<DensityMatrix, QStateError> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QStateError::NonFinite);
        }
        let defect = max_abs_entry(&(m - m.adjoint()));
        if defect > OPERATOR_TOL {
            return Err(QStateError::NotHermitian { defect });
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > OPERATOR_TOL || trace.im.abs() > OPERATOR_TOL {
            return Err(QStateError::TraceNotOne { trace: trace.re });
        }
        let sym = (m + m.adjoint()).unscale(2.0);
        let rho = DensityMatrix { m: sym };
        let min = rho.raw_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -EIGENVALUE_FLOOR {
            return Err(QStateError::NotPositive { eigenvalue: min });
        }
        Ok(rho)
    }

    /// The maximally mixed state, 𝟙/4.
    pub fn maximally_mixed() -> DensityMatrix {
        DensityMatrix {
            m: Matrix4::identity().unscale(4.0),
        }
    }

    /// Convex combination `w·a + (1−w)·b`; `w` must lie in [0, 1].
    pub fn convex_mix(a: &DensityMatrix, b: &DensityMatrix, w: f64) -> Result<DensityMatrix, QStateError> {
        if !w.is_finite() || !(0.0..=1.0).contains(&w) {
            return Err(QStateError::WeightOutOfRange { weight: w });
        }
        DensityMatrix::from_matrix(a.m.scale(w) + b.m.scale(1.0 - w))
    }

    /// The underlying 4×4 matrix.
    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.m
    }

    /// Trace (real part; imaginary part is zero by construction).
    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Purity tr(ρ²); 1 for pure states, 1/4 for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    fn raw_eigenvalues(&self) -> [f64; 4] {
        let eig = nalgebra::linalg::SymmetricEigen::new(self.m);
        let mut ev = [0.0; 4];
        for (slot, v) in ev.iter_mut().zip(eig.eigenvalues.iter()) {
            *slot = *v;
        }
        ev
    }

    /// Eigenvalues sorted in descending order; values in
    /// `[-EIGENVALUE_FLOOR, 0)` are clamped to exactly 0.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev = self.raw_eigenvalues();
        for v in ev.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        ev.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
        ev
    }

    /// Diagonal of ρ in the detection basis: the four channel probabilities.
    pub fn channel_probabilities(&self) -> ChannelProbabilities {
        let p = [
            self.m[(0, 0)].re,
            self.m[(1, 1)].re,
            self.m[(2, 2)].re,
            self.m[(3, 3)].re,
        ];
        ChannelProbabilities::new(p).expect("diagonal of a valid density matrix is a distribution")
    }
}

/// A product unitary `U_momentum ⊗ U_polarization` acting on the two qubits
/// of one photon.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    momentum: Matrix2<Complex64>,
    polarization: Matrix2<Complex64>,
}

fn unitarity_defect(u: &Matrix2<Complex64>) -> f64 {
    let d = u.adjoint() * u - Matrix2::identity();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl LocalUnitary {
    /// Validates both blocks as unitary within [`OPERATOR_TOL`].
    pub fn new(
        momentum: Matrix2<Complex64>,
        polarization: Matrix2<Complex64>,
    ) -> Result<LocalUnitary, QStateError> {
        for u in [&momentum, &polarization] {
            if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(QStateError::NonFinite);
            }
            let defect = unitarity_defect(u);
            if defect > OPERATOR_TOL {
                return Err(QStateError::NotUnitary { defect });
            }
        }
        Ok(LocalUnitary { momentum, polarization })
    }

    /// The identity on both qubits.
    pub fn identity() -> LocalUnitary {
        LocalUnitary {
            momentum: Matrix2::identity(),
            polarization: Matrix2::identity(),
        }
    }

    /// The momentum block.
    pub fn momentum(&self) -> &Matrix2<Complex64> {
        &self.momentum
    }

    /// The polarization block.
    pub fn polarization(&self) -> &Matrix2<Complex64> {
        &self.polarization
    }

    /// The full 4×4 operator `U_momentum ⊗ U_polarization` in basis order.
    pub fn full(&self) -> Matrix4<Complex64> {
        let k = self.momentum.kronecker(&self.polarization);
        Matrix4::from_iterator(k.iter().copied())
    }

    /// Conjugation `U ρ U†`.
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let u = self.full();
        let m = u * rho.matrix() * u.adjoint();
        DensityMatrix::from_matrix(m).expect("unitary conjugation preserves density-matrix validity")
    }

    /// Action `U |ψ⟩` on a pure state.
    pub fn apply_state(&self, psi: &StateVector) -> StateVector {
        StateVector::from_vector(self.full() * psi.amplitudes())
            .expect("unitary action preserves normalization")
    }
}

/// A probability distribution over the four detection channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelProbabilities {
    p: [f64; 4],
}

impl ChannelProbabilities {
    /// Validates four probabilities: finite, within `[-OPERATOR_TOL, 1 +
    /// OPERATOR_TOL]` (then clamped to [0, 1]), summing to 1 within
    /// [`OPERATOR_TOL`].
    pub fn new(p: [f64; 4]) -> Result<ChannelProbabilities, QStateError> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(QStateError::NonFinite);
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > OPERATOR_TOL {
            return Err(QStateError::ProbabilityNotNormalized { sum });
        }
        let mut clamped = [0.0; 4];
        for (out, &x) in clamped.iter_mut().zip(p.iter()) {
            if !(-OPERATOR_TOL..=1.0 + OPERATOR_TOL).contains(&x) {
                return Err(QStateError::ProbabilityNotNormalized { sum });
            }
            *out = x.clamp(0.0, 1.0);
        }
        Ok(ChannelProbabilities { p: clamped })
    }

    /// Probability of one channel.
    pub fn get(&self, ch: Channel) -> f64 {
        self.p[ch.index()]
    }

    /// Probabilities in basis order.
    pub fn as_array(&self) -> [f64; 4] {
        self.p
    }

    /// Exact correlation E = Σ_ch sign(ch)·p(ch) implied by the distribution.
    pub fn correlation(&self) -> f64 {
        Channel::ALL
            .iter()
            .map(|ch| ch.correlation_sign() * self.get(*ch))
            .sum()
    }
}
