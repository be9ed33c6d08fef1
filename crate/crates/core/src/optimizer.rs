//! POVM optimization: the two routes to the measurement-optimized Van Trees
//! information.
//!
//! * [`optimize_restricted`] — deterministic scan + golden-section refinement
//!   of the projector-family parameter ε (closed-form Fisher integrand).
//! * [`optimize_montecarlo`] — Haar-random search over projective
//!   measurements in an enlarged space, sweeping the enlarged dimension until
//!   the optimum stabilizes, followed by downhill refinement of the basis.

use crate::hilbert::{coherent_state, phase_derivative, phase_evolve, CoherentModel};
use crate::infotheory::{
    family_likelihood_term, InfoError, DEAD_OUTCOME_MAX_DPROB, OUTCOME_PROB_FLOOR,
};
use crate::povm::{haar_unitary, projective_from_unitary, Povm, PovmError, ProjectorPovmParam};
use crate::priors::{prior_fisher, PriorGrid};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Number of ε grid points scanned over [0, 2π) before refinement.
pub const DEFAULT_SCAN_POINTS: usize = 720;

/// Golden-section refinement stops once the ε bracket is this narrow (rad).
pub const EPSILON_TOL: f64 = 1e-6;

/// Default Monte-Carlo samples per enlarged dimension.
pub const DEFAULT_MC_BUDGET: usize = 2000;

/// Two-significant-digit agreement between consecutive enlarged dimensions,
/// operationalized as a relative change below this threshold.
pub const DIM_CONVERGENCE_REL: f64 = 5e-3;

/// The enlarged-dimension sweep gives up after d + this many extra dimensions.
pub const MAX_EXTRA_DIMS: usize = 8;

/// Initial downhill step δ in e^{iδH} (H Frobenius-normalized).
pub const REFINE_INITIAL_STEP: f64 = 0.1;

/// Downhill refinement stops once the step has been halved below this.
pub const REFINE_MIN_STEP: f64 = 1e-4;

/// Random sampling is weighted 10:1 over refinement: the refinement phase
/// gets budget / this many evaluations.
pub const REFINE_BUDGET_FRACTION: usize = 10;

/// Directions polled per step size before the step is declared a failure
/// and halved. A single rejected direction says little in a
/// D²-dimensional tangent space; halving on every rejection collapses the
/// step after ~25 evaluations and strands the polish far from the optimum.
pub const REFINE_POLL_DIRECTIONS: usize = 64;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("sample budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Povm(#[from] PovmError),
}

impl From<InfoError> for OptimizerError {
    fn from(err: InfoError) -> Self {
        OptimizerError::Povm(PovmError::from(err))
    }
}

/// The measurement an optimization settled on: either a projector-family
/// parameter or an explicit POVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BestPovm {
    Family { epsilon: f64 },
    Matrix { povm: Povm },
}

/// Outcome of a POVM optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    /// Best Van Trees information found (likelihood term + prior term).
    pub best_value: f64,
    /// The measurement achieving `best_value`.
    pub best_povm: BestPovm,
    /// Information-functional evaluations spent (scan + refinement, or
    /// candidates + downhill steps).
    pub samples_used: usize,
    /// Running best Van Trees value after finishing each enlarged dimension.
    pub dimension_trace: Vec<(usize, f64)>,
    /// Whether the enlarged-dimension sweep stabilized (always true for the
    /// restricted scan).
    pub converged: bool,
}

/// Maximize the Van Trees information over the projector family: uniform ε
/// scan over [0, 2π) followed by golden-section refinement to
/// [`EPSILON_TOL`]. Deterministic.
pub fn optimize_restricted(model: &CoherentModel, prior: &PriorGrid) -> OptimizationReport {
    let objective = |eps: f64| family_likelihood_term(model, prior, eps);

    let step = TAU / DEFAULT_SCAN_POINTS as f64;
    let mut best_j = 0;
    let mut best_val = f64::NEG_INFINITY;
    for j in 0..DEFAULT_SCAN_POINTS {
        let val = objective(j as f64 * step);
        if val > best_val {
            best_val = val;
            best_j = j;
        }
    }

    // The scan maximum is bracketed by its grid neighbours; ε is kept
    // unwrapped here (the integrand is 2π-periodic in ε).
    let center = best_j as f64 * step;
    let (eps_star, val_star, golden_evals) =
        golden_section_max(&objective, center - step, center + step, EPSILON_TOL);

    let epsilon = ProjectorPovmParam::new(eps_star).epsilon();
    OptimizationReport {
        best_value: val_star.max(best_val) + prior_fisher(prior),
        best_povm: BestPovm::Family { epsilon },
        samples_used: DEFAULT_SCAN_POINTS + golden_evals,
        dimension_trace: Vec::new(),
        converged: true,
    }
}

/// Golden-section search for the maximum of `f` on [a, b]; returns the
/// abscissa, the value there, and the number of evaluations.
fn golden_section_max(
    f: &dyn Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64, usize) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 >= f2 {
        (x1, f1, evals)
    } else {
        (x2, f2, evals)
    }
}

/// Probe state and derivative tabulated over the prior grid, so that one
/// candidate POVM costs two small matrix products instead of a fresh Born
/// evaluation per grid node.
pub(crate) struct LikelihoodGrid {
    /// d × M; column j holds ψ(θ_j).
    psi: DMatrix<Complex64>,
    /// d × M; column j holds ∂_θ ψ(θ_j).
    dpsi: DMatrix<Complex64>,
    /// Quadrature weight Δ·λ(θ_j) per grid node.
    weights: Vec<f64>,
    pub(crate) prior_term: f64,
}

impl LikelihoodGrid {
    pub(crate) fn new(model: &CoherentModel, prior: &PriorGrid) -> Self {
        let base = coherent_state(model);
        let d = model.dim();
        let m = prior.len();
        let mut psi = DMatrix::zeros(d, m);
        let mut dpsi = DMatrix::zeros(d, m);
        for (j, &theta) in prior.thetas().iter().enumerate() {
            let state = phase_evolve(&base, theta);
            dpsi.column_mut(j)
                .copy_from(phase_derivative(&state).as_vector());
            psi.column_mut(j).copy_from(state.as_vector());
        }
        let spacing = prior.spacing();
        let weights = prior.density().iter().map(|&l| l * spacing).collect();
        Self {
            psi,
            dpsi,
            weights,
            prior_term: prior_fisher(prior),
        }
    }

    /// Likelihood term ∫ I(θ) λ dθ of the projective POVM induced by the
    /// columns of `unitary` (enlarged dimension D ≥ d). Uses a_k(θ) =
    /// Σ_j V_{jk} ψ_j(θ): p_k = |a_k|², dp_k = 2 Re(b̄_k a_k). Outcome
    /// handling mirrors `fisher_information` exactly, so this agrees with
    /// the Born-rule route to machine precision.
    pub(crate) fn likelihood_term(&self, unitary: &DMatrix<Complex64>) -> Result<f64, PovmError> {
        let d = self.psi.nrows();
        let top = unitary.rows(0, d);
        let amp = top.transpose() * &self.psi; // D × M
        let damp = top.transpose() * &self.dpsi;

        let mut total = 0.0;
        for (j, &w) in self.weights.iter().enumerate() {
            let a_col = amp.column(j);
            let b_col = damp.column(j);
            let mut fisher = 0.0;
            for (a, b) in a_col.iter().zip(b_col.iter()) {
                let p = a.norm_sqr();
                let dp = 2.0 * (b.conj() * a).re;
                if p > OUTCOME_PROB_FLOOR {
                    fisher += dp * dp / p;
                } else if dp.abs() > DEAD_OUTCOME_MAX_DPROB {
                    return Err(PovmError::from(InfoError::SingularOutcome {
                        index: a_col.len() * j,
                        prob: p,
                        dprob: dp.abs(),
                    }));
                }
            }
            total += w * fisher;
        }
        Ok(total)
    }
}

/// Decorrelated per-candidate seed: every (dimension, index) pair gets its
/// own stream, so parallel evaluation order cannot change the result.
fn substream_seed(seed: u64, lane: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(lane.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const REFINE_LANE: u64 = u64::MAX;

/// Deterministic maximum over (value, candidate index): larger value wins,
/// ties go to the smaller index, so a parallel reduction is
/// schedule-independent.
fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn draw_candidate(seed: u64, dim: u64, index: u64, n: usize) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, dim, index));
    haar_unitary(n, &mut rng)
}

/// Hermitian direction with unit Frobenius norm, drawn from the GUE-like
/// symmetrization of a complex Gaussian matrix.
fn random_hermitian_direction<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut h = (&g + g.adjoint()).scale(0.5);
    let norm = h.norm();
    if norm > 0.0 {
        h = h.unscale(norm);
    }
    h
}

/// e^{iδH} for Hermitian H via its spectral decomposition.
fn unitary_rotation(h: &DMatrix<Complex64>, delta: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        h.nrows(),
        eig.eigenvalues.iter().map(|&l| Complex64::cis(delta * l)),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

/// Maximize the Van Trees information over Haar-random projective
/// measurements.
///
/// For each enlarged dimension D = d, d+1, … the search draws `budget`
/// Haar-random D×D bases, keeps the best, and stops the sweep once the
/// running best changes by less than [`DIM_CONVERGENCE_REL`] relative to the
/// previous dimension (two significant digits). The best basis is then
/// refined by a downhill walk: propose V ← e^{iδH}V with a random normalized
/// Hermitian H, keep improvements (reusing a successful direction until it
/// stops paying), halve δ once [`REFINE_POLL_DIRECTIONS`] proposals in a row
/// are rejected, stop below [`REFINE_MIN_STEP`] or after
/// budget/[`REFINE_BUDGET_FRACTION`] proposals.
///
/// If the sweep reaches d + [`MAX_EXTRA_DIMS`] without stabilizing the
/// report is returned with `converged = false` rather than an error.
/// Deterministic given `seed`; candidates are evaluated from per-index
/// substreams so thread scheduling cannot affect the result.
pub fn optimize_montecarlo(
    model: &CoherentModel,
    prior: &PriorGrid,
    budget: usize,
    seed: u64,
) -> Result<OptimizationReport, OptimizerError> {
    if budget == 0 {
        return Err(OptimizerError::ZeroBudget);
    }
    let grid = LikelihoodGrid::new(model, prior);
    let d = model.dim();

    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut samples_used = 0;
    let mut converged = false;
    let mut best_val = f64::NEG_INFINITY;
    let mut best_basis: Option<DMatrix<Complex64>> = None;

    for extra in 0..=MAX_EXTRA_DIMS {
        let dd = d + extra;
        let (dim_best, dim_idx) = (0..budget)
            .into_par_iter()
            .map(|i| -> Result<(f64, usize), OptimizerError> {
                let v = draw_candidate(seed, dd as u64, i as u64, dd);
                Ok((grid.likelihood_term(&v)?, i))
            })
            .try_reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| Ok(better(a, b)))?;
        samples_used += budget;

        if dim_best > best_val {
            best_val = dim_best;
            best_basis = Some(draw_candidate(seed, dd as u64, dim_idx as u64, dd));
        }
        trace.push((dd, best_val + grid.prior_term));

        if trace.len() >= 2 {
            let prev = trace[trace.len() - 2].1;
            let cur = trace[trace.len() - 1].1;
            if (cur - prev).abs() <= DIM_CONVERGENCE_REL * prev.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
    }

    let mut basis = best_basis.expect("at least one dimension is always swept");

    let refine_budget = budget / REFINE_BUDGET_FRACTION;
    if refine_budget > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, REFINE_LANE, 0));
        let mut step = REFINE_INITIAL_STEP;
        let mut used = 0;
        let mut rejected_at_step = 0;
        // A direction that just improved the value is likely to keep improving
        // it: reuse it until it fails, so the walk can travel along a ridge
        // instead of re-drawing an isotropic direction after every step.
        let mut held: Option<DMatrix<Complex64>> = None;
        while step >= REFINE_MIN_STEP && used < refine_budget {
            let direction = match held.take() {
                Some(h) => h,
                None => random_hermitian_direction(basis.nrows(), &mut rng),
            };
            let candidate = unitary_rotation(&direction, step) * &basis;
            let val = grid.likelihood_term(&candidate)?;
            used += 1;
            if val > best_val {
                best_val = val;
                basis = candidate;
                rejected_at_step = 0;
                held = Some(direction);
            } else {
                rejected_at_step += 1;
                if rejected_at_step >= REFINE_POLL_DIRECTIONS {
                    step *= 0.5;
                    rejected_at_step = 0;
                }
            }
        }
        samples_used += used;
        if let Some(last) = trace.last_mut() {
            last.1 = best_val + grid.prior_term;
        }
    }

    let povm = projective_from_unitary(&basis, d)?;
    Ok(OptimizationReport {
        best_value: best_val + grid.prior_term,
        best_povm: BestPovm::Matrix { povm },
        samples_used,
        dimension_trace: trace,
        converged,
    })
}
