//! Discretized priors and posteriors on the phase interval [-π, π).
//!
//! Densities live on a uniform midpoint grid θ_i = -π + (i+½)Δ, Δ = 2π/M.
//! The midpoint offset keeps the node set symmetric under θ → -θ, so even
//! densities have an exactly vanishing grid mean. All integrals use the
//! trapezoid rule of the periodic extension, which on this grid reduces to
//! Δ·Σᵢ fᵢ. Gaussian priors are deliberately *not* wrapped around the circle:
//! the density is the real-line Gaussian sampled on the nodes and
//! renormalized, matching the convention of the analytic formulas elsewhere
//! in the crate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of grid nodes.
pub const DEFAULT_GRID_POINTS: usize = 2048;

/// Densities below this fraction of the maximum are left out of the
/// logarithmic-derivative quotient in [`prior_fisher`] (tail guard).
pub const FISHER_TAIL_GUARD: f64 = 1e-15;

/// Smallest Bayes normalizer treated as non-degenerate.
pub const NORMALIZER_MIN: f64 = 1e-300;

#[derive(Debug, Error, PartialEq)]
pub enum PriorError {
    #[error("grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("density value at node {index} is negative or not finite")]
    BadDensity { index: usize },
    #[error("likelihood length {got} does not match grid length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("likelihood value at node {index} is negative or not finite")]
    BadLikelihood { index: usize },
    #[error("posterior normalizer {0:.3e} is numerically zero")]
    ZeroNormalizer(f64),
}

/// A normalized probability density sampled on the uniform phase grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorGrid {
    thetas: Vec<f64>,
    density: Vec<f64>,
    spacing: f64,
}

impl PriorGrid {
    /// Normalize arbitrary non-negative node values into a density.
    pub fn from_density(values: Vec<f64>) -> Result<Self, PriorError> {
        let m = values.len();
        if m < 2 {
            return Err(PriorError::GridTooSmall(m));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(PriorError::BadDensity { index });
        }
        let spacing = std::f64::consts::TAU / m as f64;
        let mass: f64 = values.iter().sum::<f64>() * spacing;
        if mass <= NORMALIZER_MIN {
            return Err(PriorError::ZeroNormalizer(mass));
        }
        let density = values.into_iter().map(|v| v / mass).collect();
        Ok(Self {
            thetas: midpoint_nodes(m),
            density,
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Δ·Σᵢ fᵢ — the periodic trapezoid rule for node samples of f.
    pub fn integrate_nodes(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values.iter().sum::<f64>() * self.spacing
    }

    /// ∫ f(θ) λ(θ) dθ for node samples of f.
    pub fn expectation_of(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values
            .iter()
            .zip(&self.density)
            .map(|(v, d)| v * d)
            .sum::<f64>()
            * self.spacing
    }

    /// Total mass Δ·Σλᵢ; 1 up to rounding by construction.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.spacing
    }

    /// Two-column CSV (`theta,density`) with round-trip-lossless floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,density\n");
        for (t, d) in self.thetas.iter().zip(&self.density) {
            out.push_str(&format!("{t:.16e},{d:.16e}\n"));
        }
        out
    }
}

pub(crate) fn midpoint_nodes(m: usize) -> Vec<f64> {
    let spacing = std::f64::consts::TAU / m as f64;
    (0..m)
        .map(|i| -std::f64::consts::PI + (i as f64 + 0.5) * spacing)
        .collect()
}

/// Flat prior λ₀ = 1/2π on M nodes.
pub fn flat_prior(m: usize) -> Result<PriorGrid, PriorError> {
    if m < 2 {
        return Err(PriorError::GridTooSmall(m));
    }
    let spacing = std::f64::consts::TAU / m as f64;
    Ok(PriorGrid {
        thetas: midpoint_nodes(m),
        density: vec![1.0 / std::f64::consts::TAU; m],
        spacing,
    })
}

/// Unwrapped Gaussian of width σ centered at 0, renormalized on the grid.
pub fn gaussian_prior(sigma: f64, m: usize) -> Result<PriorGrid, PriorError> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(PriorError::BadSigma(sigma));
    }
    if m < 2 {
        return Err(PriorError::GridTooSmall(m));
    }
    let values = midpoint_nodes(m)
        .into_iter()
        .map(|t| (-t * t / (2.0 * sigma * sigma)).exp())
        .collect();
    PriorGrid::from_density(values)
}

/// Multiply the prior by node-sampled likelihood values and renormalize.
pub fn bayes_update(prior: &PriorGrid, likelihood: &[f64]) -> Result<PriorGrid, PriorError> {
    if likelihood.len() != prior.len() {
        return Err(PriorError::LengthMismatch {
            expected: prior.len(),
            got: likelihood.len(),
        });
    }
    if let Some(index) = likelihood.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(PriorError::BadLikelihood { index });
    }
    let unnormalized: Vec<f64> = prior
        .density
        .iter()
        .zip(likelihood)
        .map(|(d, l)| d * l)
        .collect();
    let normalizer: f64 = unnormalized.iter().sum::<f64>() * prior.spacing;
    if normalizer <= NORMALIZER_MIN {
        return Err(PriorError::ZeroNormalizer(normalizer));
    }
    Ok(PriorGrid {
        thetas: prior.thetas.clone(),
        density: unnormalized.into_iter().map(|v| v / normalizer).collect(),
        spacing: prior.spacing,
    })
}

/// Linear (non-circular) posterior mean and the variance about it.
pub fn posterior_mean_and_risk(prior: &PriorGrid) -> (f64, f64) {
    let mean: f64 = prior
        .thetas
        .iter()
        .zip(&prior.density)
        .map(|(t, d)| t * d)
        .sum::<f64>()
        * prior.spacing;
    let risk: f64 = prior
        .thetas
        .iter()
        .zip(&prior.density)
        .map(|(t, d)| (t - mean) * (t - mean) * d)
        .sum::<f64>()
        * prior.spacing;
    (mean, risk)
}

/// Information carried by the prior itself: ∫ (λ'(θ))²/λ(θ) dθ.
///
/// λ' uses wrapped central differences (the phase is 2π-periodic). Nodes with
/// density below [`FISHER_TAIL_GUARD`]×max are skipped: the quotient there is
/// numerically meaningless and the true contribution is below rounding.
pub fn prior_fisher(prior: &PriorGrid) -> f64 {
    let m = prior.len();
    let d = prior.spacing;
    let max_density = prior.density.iter().cloned().fold(0.0, f64::max);
    let guard = FISHER_TAIL_GUARD * max_density;
    let mut total = 0.0;
    for i in 0..m {
        let lambda = prior.density[i];
        if lambda <= guard {
            continue;
        }
        let prev = prior.density[(i + m - 1) % m];
        let next = prior.density[(i + 1) % m];
        let slope = (next - prev) / (2.0 * d);
        total += slope * slope / lambda;
    }
    total * d
}
