//! POVM measurements on the truncated probe space.
//!
//! Two families matter here: the two-outcome projector family
//! {|α(ε)⟩⟨α(ε)|, 1 − |α(ε)⟩⟨α(ε)|} used by the analytic optimizer and the
//! adaptive schemes, and Haar-random projective measurements on an enlarged
//! space used by the Monte-Carlo optimizer. A D-outcome projective
//! measurement on dimension D ≥ d acts on the physical d-dimensional state
//! (embedded in the first d coordinates) through the top-left d×d block of
//! each rank-one projector.

use crate::hilbert::{coherent_state, phase_derivative, phase_evolve, CoherentModel, FockVector};
use crate::infotheory::{InfoError, OutcomeDistribution};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest allowed deviation |E_ij − conj(E_ji)| for a POVM element.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Smallest eigenvalue a POVM element may have (rounding slack below zero).
pub const PSD_MIN_EIGENVALUE: f64 = -1e-8;

/// Largest allowed per-entry deviation of Σ_ξ E_ξ from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-8;

/// Born probabilities within this distance of 0 or 1 are clamped onto the
/// boundary; anything farther outside is an error.
pub const PROBABILITY_CLAMP: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum PovmError {
    #[error("a POVM needs at least one element")]
    Empty,
    #[error("element {element} is {rows}x{cols}, expected square {dim}x{dim}")]
    ShapeMismatch {
        element: usize,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("{got} labels for {elements} elements")]
    LabelCountMismatch { elements: usize, got: usize },
    #[error("element {element} deviates from Hermiticity by {deviation:.3e}")]
    NotHermitian { element: usize, deviation: f64 },
    #[error(
        "element {element} has eigenvalue {min_eigenvalue:.3e} below {PSD_MIN_EIGENVALUE:.0e}"
    )]
    NotPositive { element: usize, min_eigenvalue: f64 },
    #[error("completeness violated: max |ΣE - I| entry is {deviation:.3e}")]
    Incomplete { deviation: f64 },
    #[error("POVM dimension {povm} does not match state dimension {state}")]
    StateDimensionMismatch { povm: usize, state: usize },
    #[error("enlarged dimension {enlarged} must be at least the physical dimension {dim}")]
    EnlargedTooSmall { dim: usize, enlarged: usize },
    #[error("physical dimension must be at least 1")]
    ZeroDimension,
    #[error("outcome {element} has probability {value:.6e} outside [0,1] beyond the clamp window")]
    ProbabilityOutOfRange { element: usize, value: f64 },
    #[error(transparent)]
    Distribution(#[from] InfoError),
}

/// Parameter of the two-outcome projector family: the reference phase ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorPovmParam {
    epsilon: f64,
}

impl ProjectorPovmParam {
    /// Wraps the phase into the canonical [0, 2π) range.
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon: epsilon.rem_euclid(std::f64::consts::TAU),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// A validated positive operator-valued measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmWire", into = "PovmWire")]
pub struct Povm {
    elements: Vec<DMatrix<Complex64>>,
    labels: Vec<u32>,
}

impl Povm {
    /// Build and validate a POVM from explicit elements and outcome labels.
    pub fn new(elements: Vec<DMatrix<Complex64>>, labels: Vec<u32>) -> Result<Self, PovmError> {
        if elements.is_empty() {
            return Err(PovmError::Empty);
        }
        if labels.len() != elements.len() {
            return Err(PovmError::LabelCountMismatch {
                elements: elements.len(),
                got: labels.len(),
            });
        }
        let povm = Self { elements, labels };
        povm.validate()?;
        Ok(povm)
    }

    /// Re-check every structural invariant (shape, Hermiticity, positivity,
    /// completeness). Constructors run this; deserialization does too.
    pub fn validate(&self) -> Result<(), PovmError> {
        let dim = self.elements[0].nrows();
        for (k, e) in self.elements.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(PovmError::ShapeMismatch {
                    element: k,
                    rows: e.nrows(),
                    cols: e.ncols(),
                    dim,
                });
            }
            let mut herm_dev = 0.0f64;
            for i in 0..dim {
                for j in 0..dim {
                    herm_dev = herm_dev.max((e[(i, j)] - e[(j, i)].conj()).norm());
                }
            }
            if herm_dev > HERMITICITY_TOL {
                return Err(PovmError::NotHermitian {
                    element: k,
                    deviation: herm_dev,
                });
            }
            let eig = e.clone().symmetric_eigen();
            let min_eigenvalue = eig
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min_eigenvalue < PSD_MIN_EIGENVALUE {
                return Err(PovmError::NotPositive {
                    element: k,
                    min_eigenvalue,
                });
            }
        }
        let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
        for e in &self.elements {
            sum += e;
        }
        let mut deviation = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let target = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                deviation = deviation.max((sum[(i, j)] - target).norm());
            }
        }
        if deviation > COMPLETENESS_TOL {
            return Err(PovmError::Incomplete { deviation });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DMatrix<Complex64>] {
        &self.elements
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }
}

/// Wire format: row-major complex matrices, each entry an [re, im] pair.
#[derive(Serialize, Deserialize)]
struct PovmWire {
    dim: usize,
    labels: Vec<u32>,
    elements: Vec<Vec<[f64; 2]>>,
}

impl From<Povm> for PovmWire {
    fn from(povm: Povm) -> Self {
        let dim = povm.dim();
        let elements = povm
            .elements
            .iter()
            .map(|e| {
                let mut rows = Vec::with_capacity(dim * dim);
                for i in 0..dim {
                    for j in 0..dim {
                        rows.push([e[(i, j)].re, e[(i, j)].im]);
                    }
                }
                rows
            })
            .collect();
        Self {
            dim,
            labels: povm.labels,
            elements,
        }
    }
}

impl TryFrom<PovmWire> for Povm {
    type Error = PovmError;

    fn try_from(wire: PovmWire) -> Result<Self, Self::Error> {
        let dim = wire.dim;
        let mut elements = Vec::with_capacity(wire.elements.len());
        for (k, flat) in wire.elements.iter().enumerate() {
            if flat.len() != dim * dim {
                return Err(PovmError::ShapeMismatch {
                    element: k,
                    rows: flat.len().checked_div(dim).unwrap_or(0),
                    cols: dim,
                    dim,
                });
            }
            let e = DMatrix::from_fn(dim, dim, |i, j| {
                let [re, im] = flat[i * dim + j];
                Complex64::new(re, im)
            });
            elements.push(e);
        }
        Povm::new(elements, wire.labels)
    }
}

/// Two-outcome measurement {P(ε), 1 − P(ε)} with P(ε) = |α(ε)⟩⟨α(ε)|.
///
/// Outcome labels are (1, 2): label 1 is the projection onto the reference
/// coherent state.
pub fn projector_family(model: &CoherentModel, param: ProjectorPovmParam) -> Povm {
    let reference = phase_evolve(&coherent_state(model), param.epsilon());
    let v = reference.as_vector();
    let dim = v.len();
    let mut projector = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            projector[(i, j)] = v[i] * v[j].conj();
        }
    }
    let mut complement = DMatrix::<Complex64>::identity(dim, dim);
    complement -= &projector;
    Povm {
        elements: vec![projector, complement],
        labels: vec![1, 2],
    }
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// R-diagonal phases absorbed into Q.
pub(crate) fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let ginibre = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / Complex64::new(std::f64::consts::SQRT_2, 0.0)
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// D-outcome POVM on the physical dimension `dim` from a projective
/// measurement in the enlarged `unitary` basis: (E_ξ)_{ij} = V̄_{iξ} V_{jξ}
/// restricted to i, j < dim. Outcome labels are 0..D-1.
pub fn projective_from_unitary(
    unitary: &DMatrix<Complex64>,
    dim: usize,
) -> Result<Povm, PovmError> {
    let enlarged = unitary.nrows();
    if dim == 0 {
        return Err(PovmError::ZeroDimension);
    }
    if enlarged < dim {
        return Err(PovmError::EnlargedTooSmall { dim, enlarged });
    }
    let mut elements = Vec::with_capacity(enlarged);
    for k in 0..enlarged {
        let e = DMatrix::from_fn(dim, dim, |i, j| unitary[(i, k)].conj() * unitary[(j, k)]);
        elements.push(e);
    }
    Povm::new(elements, (0..enlarged as u32).collect())
}

/// Draw a Haar-random projective measurement with `enlarged_dim` outcomes
/// acting on physical dimension `dim`. Deterministic in `seed`.
pub fn random_projective_povm(
    dim: usize,
    enlarged_dim: usize,
    seed: u64,
) -> Result<Povm, PovmError> {
    if dim == 0 {
        return Err(PovmError::ZeroDimension);
    }
    if enlarged_dim < dim {
        return Err(PovmError::EnlargedTooSmall {
            dim,
            enlarged: enlarged_dim,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unitary = haar_unitary(enlarged_dim, &mut rng);
    projective_from_unitary(&unitary, dim)
}

/// Outcome probabilities p_ξ = ⟨ψ|E_ξ|ψ⟩ and their θ-derivatives
/// dp_ξ = 2 Re⟨∂_θψ|E_ξ|ψ⟩ for the phase-evolution family.
pub fn born_probabilities(
    povm: &Povm,
    state: &FockVector,
) -> Result<OutcomeDistribution, PovmError> {
    if povm.dim() != state.dim() {
        return Err(PovmError::StateDimensionMismatch {
            povm: povm.dim(),
            state: state.dim(),
        });
    }
    let psi = state.as_vector();
    let dpsi_state = phase_derivative(state);
    let dpsi = dpsi_state.as_vector();
    let mut probs = Vec::with_capacity(povm.outcomes());
    let mut dprobs = Vec::with_capacity(povm.outcomes());
    for (k, e) in povm.elements.iter().enumerate() {
        let e_psi: DVector<Complex64> = e * psi;
        let raw = psi.dotc(&e_psi).re;
        let p = clamp_probability(raw).ok_or(PovmError::ProbabilityOutOfRange {
            element: k,
            value: raw,
        })?;
        let dp = 2.0 * dpsi.dotc(&e_psi).re;
        probs.push(p);
        dprobs.push(dp);
    }
    Ok(OutcomeDistribution::new(probs, dprobs)?)
}

/// Snap values within [`PROBABILITY_CLAMP`] of the boundary onto [0, 1].
fn clamp_probability(p: f64) -> Option<f64> {
    if !p.is_finite() {
        return None;
    }
    if p < 0.0 {
        return if p >= -PROBABILITY_CLAMP {
            Some(0.0)
        } else {
            None
        };
    }
    if p > 1.0 {
        return if p <= 1.0 + PROBABILITY_CLAMP {
            Some(1.0)
        } else {
            None
        };
    }
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_model() -> CoherentModel {
        CoherentModel::with_auto_dim(c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn projector_family_is_a_valid_two_outcome_povm() {
        let povm = projector_family(&unit_model(), ProjectorPovmParam::new(0.4));
        assert_eq!(povm.outcomes(), 2);
        assert_eq!(povm.labels(), &[1, 2]);
        povm.validate().unwrap();
    }

    #[test]
    fn projector_param_wraps_into_canonical_range() {
        assert_abs_diff_eq!(
            ProjectorPovmParam::new(-0.3).epsilon(),
            std::f64::consts::TAU - 0.3,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            ProjectorPovmParam::new(7.0).epsilon(),
            7.0 - std::f64::consts::TAU,
            epsilon = 1e-12
        );
        assert_eq!(ProjectorPovmParam::new(1.0).epsilon(), 1.0);
    }

    #[test]
    fn family_probabilities_match_the_overlap_closed_form() {
        let model = unit_model();
        let eps = 0.3;
        let povm = projector_family(&model, ProjectorPovmParam::new(eps));
        for theta in [0.3, 1.0, -2.0, 2.9] {
            let state = phase_evolve(&coherent_state(&model), theta);
            let dist = born_probabilities(&povm, &state).unwrap();
            let q = 2.0 * model.mean_photons();
            let closed = (-q * (1.0 - (theta - eps).cos())).exp();
            assert_abs_diff_eq!(dist.probs()[0], closed, epsilon = 1e-8);
            assert_abs_diff_eq!(dist.probs()[0] + dist.probs()[1], 1.0, epsilon = 1e-10);
            // dp₁/dθ = -2|α|² sin(θ-ε) p for the untruncated family.
            let closed_dp = -q * (theta - eps).sin() * closed;
            assert_abs_diff_eq!(dist.dprobs()[0], closed_dp, epsilon = 1e-6);
        }
    }

    #[test]
    fn family_at_matching_phase_concentrates_on_outcome_one() {
        let model = unit_model();
        let theta = 1.1;
        let povm = projector_family(&model, ProjectorPovmParam::new(theta));
        let state = phase_evolve(&coherent_state(&model), theta);
        let dist = born_probabilities(&povm, &state).unwrap();
        assert!(
            dist.probs()[1] < 1e-8,
            "complement outcome got {}",
            dist.probs()[1]
        );
        assert!(dist.probs()[0] > 1.0 - 1e-8);
    }

    #[test]
    fn identity_povm_yields_certain_static_outcome() {
        let model = unit_model();
        let state = phase_evolve(&coherent_state(&model), 0.7);
        let povm = Povm::new(
            vec![DMatrix::<Complex64>::identity(model.dim(), model.dim())],
            vec![0],
        )
        .unwrap();
        let dist = born_probabilities(&povm, &state).unwrap();
        assert_abs_diff_eq!(dist.probs()[0], 1.0, epsilon = 1e-10);
        assert_eq!(dist.dprobs()[0], 0.0);
    }

    #[test]
    fn random_projective_povm_is_valid_rank_one_and_seeded() {
        let povm = random_projective_povm(4, 7, 42).unwrap();
        assert_eq!(povm.dim(), 4);
        assert_eq!(povm.outcomes(), 7);
        assert_eq!(povm.labels(), &(0..7).collect::<Vec<u32>>());
        povm.validate().unwrap();

        // Each element is the physical block of a rank-one projector:
        // E² = tr(E)·E.
        for e in povm.elements() {
            let sq = e * e;
            let tr: Complex64 = (0..4).map(|i| e[(i, i)]).sum();
            let scaled = e * tr;
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!((sq[(i, j)] - scaled[(i, j)]).norm(), 0.0, epsilon = 1e-10);
                }
            }
        }

        let again = random_projective_povm(4, 7, 42).unwrap();
        assert_eq!(povm, again);
        let other = random_projective_povm(4, 7, 43).unwrap();
        assert_ne!(povm, other);
    }

    #[test]
    fn random_projective_povm_rejects_small_enlargement() {
        assert!(matches!(
            random_projective_povm(5, 4, 1),
            Err(PovmError::EnlargedTooSmall {
                dim: 5,
                enlarged: 4
            })
        ));
        assert!(matches!(
            random_projective_povm(0, 4, 1),
            Err(PovmError::ZeroDimension)
        ));
    }

    #[test]
    fn random_projector_traces_average_to_dim_over_outcomes() {
        // E[tr E_ξ] = d/D for Haar draws; check against the standard error.
        let (d, dd, draws) = (3usize, 5usize, 2000usize);
        let mut traces = Vec::with_capacity(draws * dd);
        for seed in 0..draws as u64 {
            let povm = random_projective_povm(d, dd, 1000 + seed).unwrap();
            for e in povm.elements() {
                traces.push((0..d).map(|i| e[(i, i)].re).sum::<f64>());
            }
        }
        let n = traces.len() as f64;
        let mean = traces.iter().sum::<f64>() / n;
        let var = traces.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0);
        let standard_error = (var / n).sqrt();
        let expected = d as f64 / dd as f64;
        assert!(
            (mean - expected).abs() < 4.0 * standard_error + 1e-3,
            "mean trace {mean} vs expected {expected} (SE {standard_error:.2e})"
        );
    }

    #[test]
    fn born_derivatives_match_central_differences() {
        let model = unit_model();
        let base = coherent_state(&model);
        let povm = random_projective_povm(model.dim(), model.dim() + 2, 7).unwrap();
        let theta = 0.9;
        let dist = born_probabilities(&povm, &phase_evolve(&base, theta)).unwrap();
        let probs_at = |t: f64| -> Vec<f64> {
            born_probabilities(&povm, &phase_evolve(&base, t))
                .unwrap()
                .probs()
                .to_vec()
        };
        let max_err = |h: f64| -> f64 {
            let plus = probs_at(theta + h);
            let minus = probs_at(theta - h);
            dist.dprobs()
                .iter()
                .enumerate()
                .map(|(k, dp)| ((plus[k] - minus[k]) / (2.0 * h) - dp).abs())
                .fold(0.0, f64::max)
        };
        let (h1, h2) = (1e-2, 1e-3);
        let slope = (max_err(h1) / max_err(h2)).ln() / (h1 / h2).ln();
        assert!(
            (1.8..=2.2).contains(&slope),
            "expected O(h^2), slope {slope}"
        );
    }

    #[test]
    fn born_rejects_dimension_mismatch() {
        let model = unit_model();
        let povm = projector_family(&model, ProjectorPovmParam::new(0.0));
        let short = FockVector::from_amplitudes(vec![c(1.0, 0.0); model.dim() - 1]).unwrap();
        assert!(matches!(
            born_probabilities(&povm, &short),
            Err(PovmError::StateDimensionMismatch { .. })
        ));
    }

    #[test]
    fn constructor_rejects_broken_povms() {
        let dim = 2;
        let id = DMatrix::<Complex64>::identity(dim, dim);
        assert!(matches!(Povm::new(vec![], vec![]), Err(PovmError::Empty)));
        assert!(matches!(
            Povm::new(vec![id.clone()], vec![0, 1]),
            Err(PovmError::LabelCountMismatch { .. })
        ));
        // Non-Hermitian element.
        let mut skew = id.clone() * Complex64::new(0.5, 0.0);
        skew[(0, 1)] = c(0.3, 0.2);
        let rest = id.clone() - skew.clone();
        assert!(matches!(
            Povm::new(vec![skew, rest], vec![0, 1]),
            Err(PovmError::NotHermitian { element: 0, .. })
        ));
        // Negative element.
        let neg = id.clone() * Complex64::new(-0.2, 0.0);
        let comp = id.clone() * Complex64::new(1.2, 0.0);
        assert!(matches!(
            Povm::new(vec![neg, comp], vec![0, 1]),
            Err(PovmError::NotPositive { element: 0, .. })
        ));
        // Incomplete sum.
        let half = id.clone() * Complex64::new(0.5, 0.0);
        assert!(matches!(
            Povm::new(
                vec![half.clone(), half.clone() * Complex64::new(0.9, 0.0)],
                vec![0, 1]
            ),
            Err(PovmError::Incomplete { .. })
        ));
    }

    #[test]
    fn povm_json_round_trip_preserves_everything() {
        let povm = random_projective_povm(3, 5, 99).unwrap();
        let json = serde_json::to_string(&povm).unwrap();
        let back: Povm = serde_json::from_str(&json).unwrap();
        assert_eq!(povm, back);
        // Spot-check the wire shape: row-major [re, im] pairs.
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["dim"], 3);
        assert_eq!(value["elements"][0].as_array().unwrap().len(), 9);
        assert_eq!(value["elements"][0][0].as_array().unwrap().len(), 2);
    }

    #[test]
    fn corrupted_json_fails_validation_on_load() {
        let povm = random_projective_povm(2, 3, 5).unwrap();
        let mut value = serde_json::to_value(&povm).unwrap();
        value["elements"][0][0][0] = serde_json::Value::from(5.0);
        let err = serde_json::from_value::<Povm>(value);
        assert!(err.is_err(), "corrupted completeness must be rejected");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn random_draws_validate_and_normalize(seed in 0u64..10_000) {
            let model = CoherentModel::with_auto_dim(c(0.7, 0.0)).unwrap();
            let povm = random_projective_povm(model.dim(), model.dim() + 3, seed).unwrap();
            povm.validate().unwrap();
            let state = phase_evolve(&coherent_state(&model), 0.3);
            let dist = born_probabilities(&povm, &state).unwrap();
            let total: f64 = dist.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            let dtotal: f64 = dist.dprobs().iter().sum();
            prop_assert!(dtotal.abs() < 1e-8);
        }
    }
}
