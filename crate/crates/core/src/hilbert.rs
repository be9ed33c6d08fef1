//! Truncated Fock-space model of a coherent probe acquiring an unknown phase.
//!
//! The probe is a coherent state |α⟩ expanded in the number basis and cut off
//! at `dim` terms; the unknown parameter θ enters through the phase evolution
//! |α⟩ → |αe^{iθ}⟩, i.e. amplitude n picks up e^{inθ}. The truncation depth is
//! validated against the Poisson tail mass so that every downstream
//! probability check can rely on ‖ψ‖² = 1 − O(10⁻¹²).

use nalgebra::DVector;
pub use num_complex::Complex64;
use thiserror::Error;

/// Maximum Poisson tail mass a model may leave outside its truncated basis.
///
/// 10⁻¹² keeps states normalized well below the 10⁻¹⁰ probability clamp and
/// the 10⁻⁸ completeness tolerances used elsewhere.
pub const TRUNCATION_TAIL_TOL: f64 = 1e-12;

/// Largest truncation dimension the automatic search will try.
const AUTO_DIM_CAP: usize = 4096;

#[derive(Debug, Error, PartialEq)]
pub enum HilbertError {
    #[error("amplitude must be finite, got {0}")]
    NonFiniteAmplitude(Complex64),
    #[error("dimension must be at least 1")]
    EmptyBasis,
    #[error(
        "truncation at dim {dim} leaves Poisson tail mass {tail:.3e} > {TRUNCATION_TAIL_TOL:.0e} for |alpha|^2 = {mean_photons}"
    )]
    TruncationTooCoarse {
        dim: usize,
        tail: f64,
        mean_photons: f64,
    },
    #[error("no dim <= {AUTO_DIM_CAP} reaches tail mass {TRUNCATION_TAIL_TOL:.0e} for |alpha|^2 = {mean_photons}")]
    AmplitudeTooLarge { mean_photons: f64 },
    #[error("amplitude list must not be empty")]
    NoAmplitudes,
    #[error("amplitude {index} is not finite")]
    NonFiniteEntry { index: usize },
}

/// Wrap an angle into the canonical interval [-π, π).
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = theta.rem_euclid(two_pi);
    if t >= std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

/// A state vector in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: DVector<Complex64>,
}

impl FockVector {
    /// Build a vector from raw number-basis amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, HilbertError> {
        if amps.is_empty() {
            return Err(HilbertError::NoAmplitudes);
        }
        if let Some(index) = amps
            .iter()
            .position(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(HilbertError::NonFiniteEntry { index });
        }
        Ok(Self {
            amps: DVector::from_vec(amps),
        })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.amps
    }

    /// Squared Euclidean norm Σ|aₙ|².
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Inner product ⟨self|other⟩ (conjugate-linear in `self`).
    ///
    /// Panics if the dimensions differ; callers pair states from one model.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner product needs equal dims");
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Coherent probe |α⟩ truncated to `dim` number states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentModel {
    alpha: Complex64,
    dim: usize,
}

impl CoherentModel {
    /// Validate an amplitude/truncation pair against the tail-mass budget.
    pub fn new(alpha: Complex64, dim: usize) -> Result<Self, HilbertError> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(HilbertError::NonFiniteAmplitude(alpha));
        }
        if dim == 0 {
            return Err(HilbertError::EmptyBasis);
        }
        let mean_photons = alpha.norm_sqr();
        let tail = poisson_tail(mean_photons, dim);
        if tail > TRUNCATION_TAIL_TOL {
            return Err(HilbertError::TruncationTooCoarse {
                dim,
                tail,
                mean_photons,
            });
        }
        Ok(Self { alpha, dim })
    }

    /// Smallest truncation dimension whose tail mass meets the budget.
    pub fn with_auto_dim(alpha: Complex64) -> Result<Self, HilbertError> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(HilbertError::NonFiniteAmplitude(alpha));
        }
        let mean_photons = alpha.norm_sqr();
        for dim in 1..=AUTO_DIM_CAP {
            if poisson_tail(mean_photons, dim) <= TRUNCATION_TAIL_TOL {
                return Self::new(alpha, dim);
            }
        }
        Err(HilbertError::AmplitudeTooLarge { mean_photons })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    /// |α|², the mean photon number of the untruncated state.
    pub fn mean_photons(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Poisson tail mass Σ_{n≥dim} e^{-μ} μⁿ/n! by forward summation.
fn poisson_tail(mean: f64, dim: usize) -> f64 {
    if mean == 0.0 {
        return if dim >= 1 { 0.0 } else { 1.0 };
    }
    // Walk the pmf up to the dim-1 term, then add terms until they stop mattering.
    let mut pmf = (-mean).exp();
    for n in 1..dim {
        pmf *= mean / n as f64;
    }
    let mut term = pmf * mean / dim as f64;
    let mut tail = 0.0;
    let mut n = dim;
    while term > 1e-30 && n < dim + 2000 {
        tail += term;
        n += 1;
        term *= mean / n as f64;
    }
    tail
}

/// Number-basis amplitudes of the truncated coherent state.
///
/// aₙ = e^{-|α|²/2} αⁿ/√n!, evaluated by the multiplicative recurrence
/// aₙ = a_{n-1}·α/√n to avoid overflowing factorials.
pub fn coherent_state(model: &CoherentModel) -> FockVector {
    let mut amps = Vec::with_capacity(model.dim);
    let mut a = Complex64::new((-model.mean_photons() / 2.0).exp(), 0.0);
    amps.push(a);
    for n in 1..model.dim {
        a *= model.alpha / Complex64::new((n as f64).sqrt(), 0.0);
        amps.push(a);
    }
    FockVector {
        amps: DVector::from_vec(amps),
    }
}

/// Apply the phase evolution θ: amplitude n picks up e^{inθ}.
pub fn phase_evolve(state: &FockVector, theta: f64) -> FockVector {
    let amps = DVector::from_iterator(
        state.dim(),
        state
            .amps
            .iter()
            .enumerate()
            .map(|(n, a)| a * Complex64::cis(n as f64 * theta)),
    );
    FockVector { amps }
}

/// Analytic θ-derivative of the evolved state: amplitude n maps to i·n·aₙ.
pub fn phase_derivative(state: &FockVector) -> FockVector {
    let amps = DVector::from_iterator(
        state.dim(),
        state
            .amps
            .iter()
            .enumerate()
            .map(|(n, a)| a * Complex64::new(0.0, n as f64)),
    );
    FockVector { amps }
}

/// |⟨α(ε)|α(θ)⟩|² by the truncated Fock inner product.
///
/// For the untruncated state this equals exp(-2|α|²(1-cos(θ-ε))); the
/// truncated value agrees within the tail budget and is what measurements on
/// the simulated space actually produce.
pub fn overlap_probability(model: &CoherentModel, theta: f64, epsilon: f64) -> f64 {
    let base = coherent_state(model);
    let at_theta = phase_evolve(&base, theta);
    let at_eps = phase_evolve(&base, epsilon);
    at_eps.inner(&at_theta).norm_sqr()
}
