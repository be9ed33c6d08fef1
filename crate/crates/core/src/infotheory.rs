//! Fisher and Van Trees information functionals on the phase grid.
//!
//! For a measurement with outcome probabilities p_ξ(θ), the (classical)
//! Fisher information is Σ_ξ (dp_ξ/dθ)²/p_ξ. The Van Trees (Bayesian)
//! information adds what the prior itself knows: Z = ∫ I(θ) λ(θ) dθ + ∫
//! (λ')²/λ dθ. Both appear here as grid functionals, together with the
//! closed forms specific to the coherent-probe projector family.

use crate::hilbert::{coherent_state, phase_evolve, wrap_angle, CoherentModel};
use crate::povm::{born_probabilities, Povm, PovmError};
use crate::priors::{prior_fisher, PriorGrid};
use thiserror::Error;

/// Outcomes with probability below this floor are treated as dead (they
/// contribute nothing) provided their derivative is also negligible.
pub const OUTCOME_PROB_FLOOR: f64 = 1e-12;

/// Largest |dp| a dead outcome may carry before it is flagged as a genuine
/// singularity of the information integrand.
pub const DEAD_OUTCOME_MAX_DPROB: f64 = 1e-6;

/// Width of the removable-singularity window around θ = ε in
/// [`family_fisher`]; inside it the analytic limit 4|α|² is returned.
pub const FAMILY_LIMIT_WINDOW: f64 = 1e-6;

/// Allowed deviation of Σp_ξ from 1.
pub const PROBABILITY_SUM_TOL: f64 = 1e-10;

/// Allowed deviation of Σdp_ξ from 0.
pub const DERIVATIVE_SUM_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum InfoError {
    #[error("distribution needs at least one outcome")]
    Empty,
    #[error("{probs} probabilities but {dprobs} derivatives")]
    LengthMismatch { probs: usize, dprobs: usize },
    #[error("outcome {index} has non-finite probability or derivative")]
    NonFinite { index: usize },
    #[error("outcome {index} has negative probability {value:.3e}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {total} (must be 1 within {PROBABILITY_SUM_TOL:.0e})")]
    ProbabilitySum { total: f64 },
    #[error("derivatives sum to {total:.3e} (must be 0 within {DERIVATIVE_SUM_TOL:.0e})")]
    DerivativeSum { total: f64 },
    #[error(
        "outcome {index} is singular: probability {prob:.3e} below {OUTCOME_PROB_FLOOR:.0e} but |dp| = {dprob:.3e}"
    )]
    SingularOutcome { index: usize, prob: f64, dprob: f64 },
}

/// Outcome probabilities of a measurement together with their θ-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
    dprobs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>, dprobs: Vec<f64>) -> Result<Self, InfoError> {
        if probs.is_empty() {
            return Err(InfoError::Empty);
        }
        if probs.len() != dprobs.len() {
            return Err(InfoError::LengthMismatch {
                probs: probs.len(),
                dprobs: dprobs.len(),
            });
        }
        for (index, (p, dp)) in probs.iter().zip(&dprobs).enumerate() {
            if !p.is_finite() || !dp.is_finite() {
                return Err(InfoError::NonFinite { index });
            }
            if *p < 0.0 {
                return Err(InfoError::NegativeProbability { index, value: *p });
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(InfoError::ProbabilitySum { total });
        }
        let dtotal: f64 = dprobs.iter().sum();
        if dtotal.abs() > DERIVATIVE_SUM_TOL {
            return Err(InfoError::DerivativeSum { total: dtotal });
        }
        Ok(Self { probs, dprobs })
    }

    pub fn outcomes(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dprobs(&self) -> &[f64] {
        &self.dprobs
    }
}

/// Classical Fisher information Σ_ξ (dp_ξ)²/p_ξ of one measurement.
///
/// Dead outcomes (p below [`OUTCOME_PROB_FLOOR`] with |dp| below
/// [`DEAD_OUTCOME_MAX_DPROB`]) contribute zero; a vanishing probability with
/// a non-negligible derivative is a genuine singularity and errors out.
pub fn fisher_information(dist: &OutcomeDistribution) -> Result<f64, InfoError> {
    let mut total = 0.0;
    for (index, (p, dp)) in dist.probs.iter().zip(&dist.dprobs).enumerate() {
        if *p > OUTCOME_PROB_FLOOR {
            total += dp * dp / p;
        } else if dp.abs() > DEAD_OUTCOME_MAX_DPROB {
            return Err(InfoError::SingularOutcome {
                index,
                prob: *p,
                dprob: dp.abs(),
            });
        }
    }
    Ok(total)
}

/// Fisher information of the projector family {P(ε), 1 − P(ε)} in closed
/// form: with q = 2|α|² and Δ = θ − ε,
///
///   p(Δ) = e^{-q(1-cos Δ)},  F(Δ) = q² sin²Δ · p/(1-p),
///
/// extended by continuity to F(0) = 2q = 4|α|² inside
/// [`FAMILY_LIMIT_WINDOW`] (the singularity at Δ = 0 is removable).
pub fn family_fisher(model: &CoherentModel, theta: f64, epsilon: f64) -> f64 {
    let q = 2.0 * model.mean_photons();
    let delta = wrap_angle(theta - epsilon);
    if delta.abs() < FAMILY_LIMIT_WINDOW {
        return 2.0 * q;
    }
    let half = (delta / 2.0).sin();
    let u = 2.0 * q * half * half; // q(1 - cos Δ), accurate for small Δ
    if u == 0.0 {
        // Only reachable for q = 0 (vacuum probe): no information.
        return 2.0 * q;
    }
    let p = (-u).exp();
    let one_minus_p = -(-u).exp_m1();
    let s = delta.sin();
    q * q * s * s * p / one_minus_p
}

/// Likelihood part of the Van Trees functional for the projector family:
/// ∫ F(θ, ε) λ(θ) dθ on the prior grid.
pub fn family_likelihood_term(model: &CoherentModel, prior: &PriorGrid, epsilon: f64) -> f64 {
    let values: Vec<f64> = prior
        .thetas()
        .iter()
        .map(|&t| family_fisher(model, t, epsilon))
        .collect();
    prior.expectation_of(&values)
}

/// Van Trees information of the projector family at reference phase ε.
pub fn van_trees_for_family(model: &CoherentModel, prior: &PriorGrid, epsilon: f64) -> f64 {
    family_likelihood_term(model, prior, epsilon) + prior_fisher(prior)
}

/// Likelihood and prior parts of the Van Trees functional for an arbitrary
/// measurement, supplied as a map θ → outcome distribution.
pub fn van_trees_split<E, F>(outcomes_at: F, prior: &PriorGrid) -> Result<(f64, f64), E>
where
    E: From<InfoError>,
    F: Fn(f64) -> Result<OutcomeDistribution, E>,
{
    let mut values = Vec::with_capacity(prior.len());
    for &theta in prior.thetas() {
        let dist = outcomes_at(theta)?;
        values.push(fisher_information(&dist).map_err(E::from)?);
    }
    Ok((prior.expectation_of(&values), prior_fisher(prior)))
}

/// Van Trees information Z = ∫ I(θ) λ dθ + ∫ (λ')²/λ dθ.
pub fn van_trees_information<E, F>(outcomes_at: F, prior: &PriorGrid) -> Result<f64, E>
where
    E: From<InfoError>,
    F: Fn(f64) -> Result<OutcomeDistribution, E>,
{
    let (likelihood, prior_part) = van_trees_split(outcomes_at, prior)?;
    Ok(likelihood + prior_part)
}

/// Van Trees information of n independent repetitions of the same
/// measurement: the likelihood term is additive, the prior term is not.
pub fn van_trees_n_copies<E, F>(outcomes_at: F, prior: &PriorGrid, n: u32) -> Result<f64, E>
where
    E: From<InfoError>,
    F: Fn(f64) -> Result<OutcomeDistribution, E>,
{
    let (likelihood, prior_part) = van_trees_split(outcomes_at, prior)?;
    Ok(n as f64 * likelihood + prior_part)
}

/// Van Trees information of a fixed POVM measured on the evolved probe.
pub fn van_trees_for_povm(
    model: &CoherentModel,
    povm: &Povm,
    prior: &PriorGrid,
) -> Result<f64, PovmError> {
    let base = coherent_state(model);
    van_trees_information(
        |theta| born_probabilities(povm, &phase_evolve(&base, theta)),
        prior,
    )
}

/// Measurement-independent ceiling of the Van Trees information: the maximum
/// over POVMs moved inside the average. For a coherent probe the pointwise
/// quantum Fisher information is 4·Var(n̂) = 4|α|², independent of θ, so the
/// ceiling is 4|α|² plus the prior term.
pub fn generalized_qfi_vq(model: &CoherentModel, prior: &PriorGrid) -> f64 {
    4.0 * model.mean_photons() + prior_fisher(prior)
}

/// Small-|α|² closed form for the family-optimized Van Trees information
/// with an unwrapped Gaussian prior of width σ:
///
///   Z ≈ 2|α|²(e^{-σ²/2} + 1) + 1/σ²,
///
/// accurate to a few percent for |α|² ≲ 0.2. Diverges as σ → 0.
pub fn zq_restricted_analytic(model: &CoherentModel, sigma: f64) -> f64 {
    let a2 = model.mean_photons();
    2.0 * a2 * ((-sigma * sigma / 2.0).exp() + 1.0) + 1.0 / (sigma * sigma)
}
