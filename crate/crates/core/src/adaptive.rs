//! Adaptive measurement schedules and fixed-measurement baselines.
//!
//! Two adaptive schemes are compared by exact enumeration of the binary
//! outcome tree (no trajectory sampling):
//!
//! * **Fisher-adaptive** — guess a phase, measure the projector family tuned
//!   to the current maximum-likelihood estimate, re-estimate, repeat. The
//!   per-true-phase error is 1/I_n(θ_r) averaged over θ_r.
//! * **Van-Trees-adaptive** — start from the flat prior, measure the family
//!   element maximizing the Van Trees information of the running posterior,
//!   Bayes-update along each outcome branch. The step-k error is the
//!   branch-probability-weighted mean of 1/Z_Q over depth-(k−1) posteriors.
//!
//! The fixed-POVM baselines repeat one measurement n times and exhibit the
//! c/n error scaling that the adaptive schemes beat.

use crate::hilbert::{coherent_state, phase_evolve, wrap_angle, CoherentModel};
use crate::infotheory::{van_trees_n_copies, van_trees_split, OUTCOME_PROB_FLOOR};
use crate::optimizer::{optimize_restricted, BestPovm};
use crate::povm::{born_probabilities, projector_family, PovmError, ProjectorPovmParam};
use crate::priors::{
    bayes_update, flat_prior, midpoint_nodes, PriorError, PriorGrid, DEFAULT_GRID_POINTS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Hard ceiling on tree depth: 2^n nodes make deeper runs intractable.
pub const MAX_TREE_DEPTH: u32 = 20;

/// Information below this is reported as an infinite-error flag.
pub const INFO_FLOOR: f64 = 1e-10;

/// Variance of the flat phase distribution on [−π, π): the error any
/// estimator can guarantee with no information at all. The fixed-Fisher
/// baseline clips its per-phase Cramér–Rao error at this value, since the
/// unclipped 1/F integrand diverges where the fixed measurement is blind.
pub const FLAT_PHASE_VARIANCE: f64 = PI * PI / 3.0;

/// Default number of maximum-likelihood grid points.
pub const DEFAULT_ML_GRID_POINTS: usize = 2048;

/// Default number of true-phase grid points for Fisher-style averages.
pub const DEFAULT_THETA_GRID_POINTS: usize = 181;

/// Relative window within which likelihood maxima count as tied.
const ML_TIE_REL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AdaptiveError {
    #[error("step count must be between 1 and {MAX_TREE_DEPTH}, got {0}")]
    BadSteps(u32),
    #[error("true-phase grid must contain at least one finite value")]
    BadThetaGrid,
    #[error("maximum-likelihood grid needs at least two points")]
    MlGridTooSmall,
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Povm(#[from] PovmError),
}

/// Which schedule produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Fisher,
    VanTrees,
    Fixed,
}

/// Sub-variant of the fixed-measurement baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedVariant {
    Fisher,
    VanTrees,
}

/// How the Fisher-adaptive scheme picks its first reference phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum InitialGuess {
    /// Deterministic θ₁ = 0.
    Zero,
    /// θ₁ drawn uniformly from [−π, π) with a fixed seed.
    Random { seed: u64 },
    /// θ₁ = θ_r (oracle start; mainly diagnostic).
    Truth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherAdaptiveOptions {
    pub ml_grid_points: usize,
    pub initial_guess: InitialGuess,
    /// When true, flagged θ_r are dropped from the mean (weights
    /// renormalized); when false (default) a single flag makes the mean
    /// error infinite.
    pub exclude_flagged: bool,
}

impl Default for FisherAdaptiveOptions {
    fn default() -> Self {
        Self {
            ml_grid_points: DEFAULT_ML_GRID_POINTS,
            initial_guess: InitialGuess::Zero,
            exclude_flagged: false,
        }
    }
}

/// Counters describing how much of the outcome tree a run touched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    /// Outcome-tree nodes evaluated (summed over true phases where the tree
    /// is walked per θ_r).
    pub branches_evaluated: usize,
    /// Branches whose posterior underflowed and was reset to flat.
    pub degenerate_resets: usize,
    /// (θ_r, step) pairs — or tree nodes — whose information fell below
    /// [`INFO_FLOOR`] (fixed-Fisher: clipped θ_r points).
    pub flagged_points: usize,
}

/// Resolved parameters of an adaptive/fixed run, embedded in the report so
/// any output can be reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfigSnapshot {
    /// Mean photon number |α|² of the probe.
    pub alpha_sq: f64,
    /// Fock-space truncation dimension.
    pub dim: usize,
    pub n: u32,
    /// "fisher", "vantrees", "fixed-fisher", or "fixed-vantrees".
    pub variant: String,
    pub ml_grid_points: Option<usize>,
    pub theta_grid_points: Option<usize>,
    pub prior_points: Option<usize>,
    pub initial_guess: Option<InitialGuess>,
    pub exclude_flagged: Option<bool>,
}

/// Result of one schedule simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRunReport {
    pub scheme: Scheme,
    pub n: u32,
    /// (step k, mean squared error in rad²) for k = 1..n.
    pub error_curve: Vec<(u32, f64)>,
    pub tree_stats: TreeStats,
    pub config: AdaptiveConfigSnapshot,
    /// Fixed baselines only: least-squares constant c fitted to k·σ²(k)
    /// over the upper half of the curve (the c in σ² ≈ c/n).
    pub fitted_constant: Option<f64>,
}

impl AdaptiveRunReport {
    /// Two-column CSV of the error curve.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,error\n");
        for (k, e) in &self.error_curve {
            out.push_str(&format!("{k},{e:.16e}\n"));
        }
        out
    }
}

fn check_steps(n: u32) -> Result<(), AdaptiveError> {
    if n == 0 || n > MAX_TREE_DEPTH {
        return Err(AdaptiveError::BadSteps(n));
    }
    Ok(())
}

/// Probabilities and θ-derivatives of the two family outcomes at Δ = θ − ε:
/// click p₁ = e^{-q(1-cos Δ)} (q = 2|α|²) and its complement.
fn branch_probs(q: f64, delta: f64) -> [(f64, f64); 2] {
    let half = (delta / 2.0).sin();
    let u = 2.0 * q * half * half;
    let p1 = (-u).exp();
    let p2 = -(-u).exp_m1();
    let dp1 = -q * delta.sin() * p1;
    [(p1, dp1), (p2, -dp1)]
}

/// Grid argmax of a likelihood vector; ties (within [`ML_TIE_REL`]) go to
/// the candidate closest to the previous estimate, then to the lower index.
/// The single-outcome likelihood is symmetric about ε, so ties are the rule,
/// not the exception.
fn ml_argmax(likelihood: &[f64], thetas: &[f64], previous: f64) -> f64 {
    let max = likelihood.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = max.abs() * ML_TIE_REL;
    let mut best_theta = thetas[0];
    let mut best_dist = f64::INFINITY;
    for (l, &t) in likelihood.iter().zip(thetas) {
        if max - l <= tol {
            let dist = wrap_angle(t - previous).abs();
            if dist < best_dist {
                best_dist = dist;
                best_theta = t;
            }
        }
    }
    best_theta
}

/// The reference phases ε of every node of the depth-n outcome tree, in
/// binary-heap layout (node i has children 2i+1 = click, 2i+2 = no-click).
struct EpsTree {
    n: u32,
    eps: Vec<f64>,
}

fn build_eps_tree(q: f64, n: u32, ml_thetas: &[f64], root_eps: f64) -> EpsTree {
    let mut eps = vec![0.0; (1usize << n) - 1];
    eps[0] = root_eps;
    let ones = vec![1.0; ml_thetas.len()];
    fill_children(q, &mut eps, 0, 0, n, &ones, ml_thetas);
    EpsTree { n, eps }
}

fn fill_children(
    q: f64,
    eps: &mut [f64],
    idx: usize,
    depth: u32,
    n: u32,
    likelihood: &[f64],
    ml_thetas: &[f64],
) {
    if depth + 1 >= n {
        return;
    }
    let e = eps[idx];
    for outcome in 0..2 {
        let child_lik: Vec<f64> = likelihood
            .iter()
            .zip(ml_thetas)
            .map(|(l, &t)| l * branch_probs(q, t - e)[outcome].0)
            .collect();
        let child_idx = 2 * idx + 1 + outcome;
        eps[child_idx] = ml_argmax(&child_lik, ml_thetas, e);
        fill_children(q, eps, child_idx, depth + 1, n, &child_lik, ml_thetas);
    }
}

/// One branch of an outcome-tree walk: the node reached and the probability
/// mass / θ-derivative accumulated along the path to it.
#[derive(Clone, Copy)]
struct Branch {
    idx: usize,
    depth: u32,
    prob: f64,
    dprob: f64,
}

impl Branch {
    const ROOT: Branch = Branch {
        idx: 0,
        depth: 0,
        prob: 1.0,
        dprob: 0.0,
    };

    fn child(self, outcome: usize, p: f64, dp: f64) -> Branch {
        Branch {
            idx: 2 * self.idx + 1 + outcome,
            depth: self.depth + 1,
            prob: self.prob * p,
            dprob: self.dprob * p + self.prob * dp,
        }
    }
}

/// Walk the tree under true phase θ_r, accumulating the Fisher information
/// of the depth-k outcome distribution into `acc[k-1]` for every k.
fn accumulate_tree_fisher(
    tree: &EpsTree,
    q: f64,
    theta_r: f64,
    at: Branch,
    acc: &mut [f64],
    visits: &mut usize,
) {
    let e = tree.eps[at.idx];
    let delta = wrap_angle(theta_r - e);
    if delta.abs() < crate::infotheory::FAMILY_LIMIT_WINDOW {
        // Measurement tuned exactly to the true phase: the no-click channel
        // has p → 0 but Fisher density → 2q·P — at this and every deeper
        // depth — while the click channel is certain and leaves (P, dP)
        // unchanged. The quotient formula loses this removable singularity,
        // so use the limit directly (same convention as `family_fisher`).
        *visits += 2;
        for slot in &mut acc[at.depth as usize..tree.n as usize] {
            *slot += 2.0 * q * at.prob;
        }
        acc[at.depth as usize] += at.dprob * at.dprob / at.prob;
        if at.depth + 1 < tree.n {
            accumulate_tree_fisher(tree, q, theta_r, at.child(0, 1.0, 0.0), acc, visits);
        }
        return;
    }
    for (outcome, (p, dp)) in branch_probs(q, delta).iter().enumerate() {
        let child = at.child(outcome, *p, *dp);
        *visits += 1;
        if child.prob > OUTCOME_PROB_FLOOR {
            acc[at.depth as usize] += child.dprob * child.dprob / child.prob;
            if child.depth < tree.n {
                accumulate_tree_fisher(tree, q, theta_r, child, acc, visits);
            }
        }
        // Dead branch: its mass, derivative, and entire subtree are
        // negligible — same rule as fisher_information.
    }
}

/// Depth-n leaf distribution (probabilities and θ-derivatives) of the
/// Fisher-adaptive outcome tree under true phase θ_r. Exposed so the tree
/// bookkeeping can be checked against the distribution invariants.
pub fn fisher_tree_distribution(
    model: &CoherentModel,
    n: u32,
    theta_r: f64,
    opts: &FisherAdaptiveOptions,
) -> Result<crate::infotheory::OutcomeDistribution, AdaptiveError> {
    check_steps(n)?;
    if opts.ml_grid_points < 2 {
        return Err(AdaptiveError::MlGridTooSmall);
    }
    let q = 2.0 * model.mean_photons();
    let ml = midpoint_nodes(opts.ml_grid_points);
    let tree = build_eps_tree(q, n, &ml, initial_epsilon(opts.initial_guess, theta_r));

    let mut probs = Vec::with_capacity(1 << n);
    let mut dprobs = Vec::with_capacity(1 << n);
    collect_leaves(&tree, q, theta_r, Branch::ROOT, &mut probs, &mut dprobs);
    Ok(crate::infotheory::OutcomeDistribution::new(probs, dprobs).map_err(PovmError::from)?)
}

fn collect_leaves(
    tree: &EpsTree,
    q: f64,
    theta_r: f64,
    at: Branch,
    probs: &mut Vec<f64>,
    dprobs: &mut Vec<f64>,
) {
    let e = tree.eps[at.idx];
    for (outcome, (p, dp)) in branch_probs(q, theta_r - e).iter().enumerate() {
        let child = at.child(outcome, *p, *dp);
        if child.depth < tree.n {
            collect_leaves(tree, q, theta_r, child, probs, dprobs);
        } else {
            probs.push(child.prob);
            dprobs.push(child.dprob);
        }
    }
}

fn initial_epsilon(guess: InitialGuess, theta_r: f64) -> f64 {
    match guess {
        InitialGuess::Zero => 0.0,
        InitialGuess::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            -PI + TAU * rng.gen::<f64>()
        }
        InitialGuess::Truth => theta_r,
    }
}

/// Midpoint weights for a periodic trapezoid average over an ascending
/// wrapped grid; the weights sum to 2π.
fn periodic_weights(sorted: &[f64]) -> Vec<f64> {
    let m = sorted.len();
    if m == 1 {
        return vec![TAU];
    }
    let gap = |i: usize| {
        if i + 1 < m {
            sorted[i + 1] - sorted[i]
        } else {
            sorted[0] + TAU - sorted[m - 1]
        }
    };
    (0..m)
        .map(|i| {
            let before = if i == 0 { gap(m - 1) } else { gap(i - 1) };
            (before + gap(i)) / 2.0
        })
        .collect()
}

/// Simulate the Fisher-adaptive schedule by exact tree enumeration.
///
/// The reference-phase tree is the same for every θ_r (the ML estimates
/// depend only on outcomes), so it is built once — except in
/// [`InitialGuess::Truth`] mode, where the root depends on θ_r.
///
/// The step-k error is (1/2π)∫ 1/I_k(θ_r) dθ_r, a periodic trapezoid over
/// `theta_grid`. θ_r whose information falls below [`INFO_FLOOR`] are
/// flagged: by default the flag propagates (the mean becomes infinite);
/// with `exclude_flagged` they are dropped and the weights renormalized.
pub fn run_fisher_adaptive(
    model: &CoherentModel,
    n: u32,
    theta_grid: &[f64],
    opts: &FisherAdaptiveOptions,
) -> Result<AdaptiveRunReport, AdaptiveError> {
    check_steps(n)?;
    if theta_grid.is_empty() || theta_grid.iter().any(|t| !t.is_finite()) {
        return Err(AdaptiveError::BadThetaGrid);
    }
    if opts.ml_grid_points < 2 {
        return Err(AdaptiveError::MlGridTooSmall);
    }

    let q = 2.0 * model.mean_photons();
    let ml = midpoint_nodes(opts.ml_grid_points);

    let mut thetas: Vec<f64> = theta_grid.iter().map(|&t| wrap_angle(t)).collect();
    thetas.sort_by(|a, b| a.partial_cmp(b).expect("finite by validation"));
    let weights = periodic_weights(&thetas);

    let shared_tree = match opts.initial_guess {
        InitialGuess::Truth => None,
        guess => Some(build_eps_tree(q, n, &ml, initial_epsilon(guess, 0.0))),
    };

    let mut stats = TreeStats::default();
    let mut infos: Vec<Vec<f64>> = Vec::with_capacity(thetas.len());
    for &theta_r in &thetas {
        let local;
        let tree = match &shared_tree {
            Some(t) => t,
            None => {
                local = build_eps_tree(q, n, &ml, theta_r);
                &local
            }
        };
        let mut acc = vec![0.0; n as usize];
        let mut visits = 0;
        accumulate_tree_fisher(tree, q, theta_r, Branch::ROOT, &mut acc, &mut visits);
        stats.branches_evaluated += visits;
        infos.push(acc);
    }

    let mut error_curve = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let mut num = 0.0;
        let mut kept_weight = 0.0;
        let mut flagged_here = 0;
        for (info, &w) in infos.iter().zip(&weights) {
            let i_k = info[(k - 1) as usize];
            if i_k < INFO_FLOOR {
                flagged_here += 1;
            } else {
                num += w / i_k;
                kept_weight += w;
            }
        }
        stats.flagged_points += flagged_here;
        // Infinite error if a flagged branch must be propagated, or if
        // flagged branches were excluded and nothing survived.
        let err = if (flagged_here > 0 && !opts.exclude_flagged) || kept_weight == 0.0 {
            f64::INFINITY
        } else if opts.exclude_flagged {
            num / kept_weight
        } else {
            num / TAU
        };
        error_curve.push((k, err));
    }

    Ok(AdaptiveRunReport {
        scheme: Scheme::Fisher,
        n,
        error_curve,
        tree_stats: stats,
        config: AdaptiveConfigSnapshot {
            alpha_sq: model.mean_photons(),
            dim: model.dim(),
            n,
            variant: "fisher".into(),
            ml_grid_points: Some(opts.ml_grid_points),
            theta_grid_points: Some(theta_grid.len()),
            prior_points: None,
            initial_guess: Some(opts.initial_guess),
            exclude_flagged: Some(opts.exclude_flagged),
        },
        fitted_constant: None,
    })
}

/// Simulate the Van-Trees-adaptive schedule starting from the flat prior.
///
/// Every tree node optimizes the family parameter for its running posterior;
/// the step-k error is the branch-weighted expectation of 1/Z_Q over the
/// depth-(k−1) posteriors. Underflowing posteriors are reset to flat and
/// counted.
pub fn run_vantrees_adaptive(
    model: &CoherentModel,
    n: u32,
) -> Result<AdaptiveRunReport, AdaptiveError> {
    check_steps(n)?;
    let prior = flat_prior(DEFAULT_GRID_POINTS)?;
    let q = 2.0 * model.mean_photons();

    let mut acc = vec![0.0; n as usize];
    let mut stats = TreeStats::default();
    vt_walk(model, q, prior, 1.0, 0, n, &mut acc, &mut stats)?;

    let error_curve = acc
        .into_iter()
        .enumerate()
        .map(|(i, e)| (i as u32 + 1, e))
        .collect();
    Ok(AdaptiveRunReport {
        scheme: Scheme::VanTrees,
        n,
        error_curve,
        tree_stats: stats,
        config: AdaptiveConfigSnapshot {
            alpha_sq: model.mean_photons(),
            dim: model.dim(),
            n,
            variant: "vantrees".into(),
            ml_grid_points: None,
            theta_grid_points: None,
            prior_points: Some(DEFAULT_GRID_POINTS),
            initial_guess: None,
            exclude_flagged: None,
        },
        fitted_constant: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn vt_walk(
    model: &CoherentModel,
    q: f64,
    prior: PriorGrid,
    weight: f64,
    depth: u32,
    n: u32,
    acc: &mut [f64],
    stats: &mut TreeStats,
) -> Result<(), AdaptiveError> {
    let report = optimize_restricted(model, &prior);
    let zq = report.best_value;
    stats.branches_evaluated += 1;
    if zq < INFO_FLOOR {
        stats.flagged_points += 1;
        acc[depth as usize] = f64::INFINITY;
    } else {
        acc[depth as usize] += weight / zq;
    }
    if depth + 1 >= n {
        return Ok(());
    }
    let BestPovm::Family { epsilon } = report.best_povm else {
        unreachable!("restricted optimizer always returns a family parameter");
    };

    for outcome in 0..2 {
        let likelihood: Vec<f64> = prior
            .thetas()
            .iter()
            .map(|&t| branch_probs(q, t - epsilon)[outcome].0)
            .collect();
        let marginal = prior.expectation_of(&likelihood);
        let child = match bayes_update(&prior, &likelihood) {
            Ok(post) => post,
            Err(PriorError::ZeroNormalizer(_)) => {
                stats.degenerate_resets += 1;
                flat_prior(prior.len())?
            }
            Err(e) => return Err(e.into()),
        };
        vt_walk(model, q, child, weight * marginal, depth + 1, n, acc, stats)?;
    }
    Ok(())
}

/// Repeat one fixed measurement n times.
///
/// * `FixedVariant::Fisher` — the family element for the initial guess ε = 0
///   is kept; the error is the Cramér–Rao average (1/2π)∫ 1/(k·F(θ_r, 0)) dθ_r
///   with the per-phase error clipped at [`FLAT_PHASE_VARIANCE`], since a
///   fixed measurement is blind at some phases and the unclipped integral
///   diverges. Clipped θ_r are counted as flagged.
/// * `FixedVariant::VanTrees` — the family element optimized for the flat
///   prior is kept; the step-k error is 1/Z(k copies) = 1/(k·A + B) with A,
///   B the single-copy likelihood and prior terms.
pub fn run_fixed_povm(
    model: &CoherentModel,
    n: u32,
    variant: FixedVariant,
) -> Result<AdaptiveRunReport, AdaptiveError> {
    check_steps(n)?;
    let q = 2.0 * model.mean_photons();
    let mut stats = TreeStats::default();

    let (error_curve, variant_name, theta_points, prior_points) = match variant {
        FixedVariant::Fisher => {
            let thetas = midpoint_nodes(DEFAULT_THETA_GRID_POINTS);
            let mut clipped_mean = 0.0;
            for &t in &thetas {
                let [(p1, dp1), _] = branch_probs(q, t);
                let fisher = if p1 < 1.0 {
                    dp1 * dp1 / (p1 * (1.0 - p1))
                } else {
                    0.0
                };
                let per_phase = if fisher < INFO_FLOOR {
                    stats.flagged_points += 1;
                    FLAT_PHASE_VARIANCE
                } else {
                    (1.0 / fisher).min(FLAT_PHASE_VARIANCE)
                };
                clipped_mean += per_phase;
            }
            clipped_mean /= thetas.len() as f64;
            stats.branches_evaluated = thetas.len();
            let curve: Vec<(u32, f64)> = (1..=n).map(|k| (k, clipped_mean / k as f64)).collect();
            (curve, "fixed-fisher", Some(DEFAULT_THETA_GRID_POINTS), None)
        }
        FixedVariant::VanTrees => {
            let prior = flat_prior(DEFAULT_GRID_POINTS)?;
            let report = optimize_restricted(model, &prior);
            let BestPovm::Family { epsilon } = report.best_povm else {
                unreachable!("restricted optimizer always returns a family parameter");
            };
            let povm = projector_family(model, ProjectorPovmParam::new(epsilon));
            let base = coherent_state(model);
            let outcomes = |t: f64| born_probabilities(&povm, &phase_evolve(&base, t));
            let (likelihood, prior_part) = van_trees_split(outcomes, &prior)?;
            debug_assert!(
                prior_part.abs() < 1e-12,
                "flat prior carries no information"
            );
            let mut curve = Vec::with_capacity(n as usize);
            for k in 1..=n {
                let z = van_trees_n_copies(outcomes, &prior, k)?;
                debug_assert_eq!(z, k as f64 * likelihood + prior_part);
                if z < INFO_FLOOR {
                    stats.flagged_points += 1;
                    curve.push((k, f64::INFINITY));
                } else {
                    curve.push((k, 1.0 / z));
                }
            }
            stats.branches_evaluated = 1;
            (curve, "fixed-vantrees", None, Some(DEFAULT_GRID_POINTS))
        }
    };

    let fitted_constant = fit_scaling_constant(&error_curve);
    Ok(AdaptiveRunReport {
        scheme: Scheme::Fixed,
        n,
        error_curve,
        tree_stats: stats,
        config: AdaptiveConfigSnapshot {
            alpha_sq: model.mean_photons(),
            dim: model.dim(),
            n,
            variant: variant_name.into(),
            ml_grid_points: None,
            theta_grid_points: theta_points,
            prior_points,
            initial_guess: None,
            exclude_flagged: None,
        },
        fitted_constant: Some(fitted_constant),
    })
}

/// Least-squares constant fit to k·σ²(k) over the upper half of the curve
/// (for a constant model, least squares is the mean).
fn fit_scaling_constant(curve: &[(u32, f64)]) -> f64 {
    let n = curve.last().map(|(k, _)| *k).unwrap_or(1);
    let lo = (n.div_ceil(2)).max(1);
    let vals: Vec<f64> = curve
        .iter()
        .filter(|(k, _)| *k >= lo)
        .map(|(k, e)| *k as f64 * e)
        .collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// Uniform midpoint grid of true phases on [−π, π), the default θ_r grid
/// for Fisher-style averages.
pub fn uniform_theta_grid(points: usize) -> Vec<f64> {
    midpoint_nodes(points.max(1))
}
