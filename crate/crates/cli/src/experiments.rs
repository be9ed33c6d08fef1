//! The five experiment drivers. Each takes a fully resolved configuration,
//! computes its quantities through `vantrees-core`, and writes the artifacts
//! selected by `output.formats` (intersected with what the experiment can
//! produce). Output writing is single-threaded and ordered; any parallelism
//! lives inside the core optimizers.

use std::path::{Path, PathBuf};

use serde::Serialize;

use vantrees_core::adaptive::{
    run_fisher_adaptive, run_fixed_povm, run_vantrees_adaptive, uniform_theta_grid, AdaptiveError,
    AdaptiveRunReport, FisherAdaptiveOptions, FixedVariant, InitialGuess,
};
use vantrees_core::hilbert::{CoherentModel, Complex64};
use vantrees_core::infotheory::{generalized_qfi_vq, zq_restricted_analytic};
use vantrees_core::optimizer::{
    optimize_montecarlo, optimize_restricted, OptimizationReport, OptimizerError,
};
use vantrees_core::priors::{flat_prior, gaussian_prior, PriorGrid};

use crate::config::ResolvedConfig;
use crate::output::{render_csv, render_json, write_artifact, Cell};
use crate::svg::{render_plot, Marker, Series};
use crate::CliError;

fn build_model(cfg: &ResolvedConfig, alpha: f64) -> Result<CoherentModel, CliError> {
    let a = Complex64::new(alpha, 0.0);
    let model = if cfg.model.dim == 0 {
        CoherentModel::with_auto_dim(a)
    } else {
        CoherentModel::new(a, cfg.model.dim)
    };
    model.map_err(|e| CliError::Config(format!("model: {e}")))
}

fn build_prior(cfg: &ResolvedConfig) -> Result<PriorGrid, CliError> {
    let prior = match cfg.prior.kind.as_str() {
        "flat" => flat_prior(cfg.grid.points),
        _ => gaussian_prior(cfg.prior.sigma, cfg.grid.points),
    };
    prior.map_err(|e| CliError::Config(format!("prior: {e}")))
}

fn wants(cfg: &ResolvedConfig, format: &str) -> bool {
    cfg.output.formats.iter().any(|f| f == format)
}

/// Config errors the experiment set catches only at run time (none today);
/// optimizer misuse maps to config, measurement math failures are internal.
fn map_optimizer(err: OptimizerError) -> CliError {
    match err {
        OptimizerError::ZeroBudget => CliError::Config(err.to_string()),
        OptimizerError::Povm(e) => CliError::Internal(format!("measurement evaluation: {e}")),
    }
}

fn map_adaptive(err: AdaptiveError) -> CliError {
    match err {
        AdaptiveError::BadSteps(_)
        | AdaptiveError::BadThetaGrid
        | AdaptiveError::MlGridTooSmall => CliError::Config(err.to_string()),
        other => CliError::Internal(format!("adaptive run: {other}")),
    }
}

/// Fail the run (exit code 3) when a Monte-Carlo dimension sweep ends
/// without stabilizing — its best value would not be trustworthy.
fn require_converged(report: &OptimizationReport, context: &str) -> Result<(), CliError> {
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Convergence(format!(
            "Monte-Carlo dimension sweep did not stabilize for {context}; raise \
             optimizer.budget or fix model.dim"
        )))
    }
}

fn guard_formats(cfg: &ResolvedConfig, supported: &[&str]) -> Result<(), CliError> {
    if supported.iter().any(|f| wants(cfg, f)) {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{} produces only {:?}; output.formats requests none of them",
            cfg.experiment, supported
        )))
    }
}

// ---------------------------------------------------------------------------
// fig1 — amplitude sweep of the optimized information
// ---------------------------------------------------------------------------

pub fn cmd_fig1(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>, CliError> {
    guard_formats(cfg, &["csv", "svg"])?;
    let prior = build_prior(cfg)?;
    let sweep = cfg.alpha_sweep();

    let mut rows = Vec::with_capacity(sweep.len());
    let mut analytic = Vec::new();
    let mut numeric = Vec::new();
    let mut vq_curve = Vec::new();
    for &alpha in &sweep {
        let model = build_model(cfg, alpha)?;
        let zq_analytic = zq_restricted_analytic(&model, cfg.prior.sigma);
        let report = optimize_montecarlo(&model, &prior, cfg.optimizer.budget, cfg.optimizer.seed)
            .map_err(map_optimizer)?;
        require_converged(&report, &format!("alpha = {alpha}"))?;
        let vq = generalized_qfi_vq(&model, &prior);

        rows.push(vec![
            Cell::Float(alpha),
            Cell::Float(zq_analytic),
            Cell::Float(report.best_value),
            Cell::Float(vq),
        ]);
        analytic.push((alpha, zq_analytic));
        numeric.push((alpha, report.best_value));
        vq_curve.push((alpha, vq));
    }

    let dir = Path::new(&cfg.output.dir);
    let mut files = Vec::new();
    if wants(cfg, "csv") {
        let text = render_csv(cfg, &["alpha", "zq_analytic", "zq_numeric", "vq"], &rows);
        files.push(write_artifact(dir, "fig1.csv", &text)?);
    }
    if wants(cfg, "svg") {
        let series = vec![
            Series::new("Z_Q restricted (analytic)", analytic).marker(Marker::None),
            Series::new("Z_Q Monte-Carlo", numeric).markers_only(),
            Series::new("V_Q", vq_curve).marker(Marker::None).dashed(),
        ];
        let svg = render_plot(
            "Optimized information vs amplitude",
            "alpha",
            "information (1/rad^2)",
            &series,
        );
        files.push(write_artifact(dir, "fig1.svg", &svg)?);
    }
    Ok(files)
}

// ---------------------------------------------------------------------------
// fig2 — Fisher-adaptive vs Van-Trees-adaptive error curves
// ---------------------------------------------------------------------------

fn fisher_options(cfg: &ResolvedConfig) -> FisherAdaptiveOptions {
    let initial_guess = match cfg.adaptive.initial_guess.as_str() {
        "random" => InitialGuess::Random {
            seed: cfg.optimizer.seed,
        },
        "truth" => InitialGuess::Truth,
        _ => InitialGuess::Zero,
    };
    FisherAdaptiveOptions {
        ml_grid_points: cfg.grid.ml_points,
        initial_guess,
        exclude_flagged: cfg.adaptive.exclude_flagged,
    }
}

pub fn cmd_fig2(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>, CliError> {
    guard_formats(cfg, &["csv", "svg"])?;
    let model = build_model(cfg, cfg.model.alpha)?;
    let n = cfg.adaptive.n;
    let theta_grid = uniform_theta_grid(cfg.grid.theta_points);
    let opts = fisher_options(cfg);

    let fisher = run_fisher_adaptive(&model, n, &theta_grid, &opts).map_err(map_adaptive)?;
    let vantrees = run_vantrees_adaptive(&model, n).map_err(map_adaptive)?;

    let rows: Vec<Vec<Cell>> = fisher
        .error_curve
        .iter()
        .zip(&vantrees.error_curve)
        .map(|(&(k, ef), &(_, ev))| vec![Cell::Int(u64::from(k)), Cell::Float(ef), Cell::Float(ev)])
        .collect();

    let dir = Path::new(&cfg.output.dir);
    let mut files = Vec::new();
    if wants(cfg, "csv") {
        let text = render_csv(cfg, &["n", "err_fisher", "err_vantrees"], &rows);
        files.push(write_artifact(dir, "fig2.csv", &text)?);
    }
    if wants(cfg, "svg") {
        let to_points = |r: &AdaptiveRunReport| {
            r.error_curve
                .iter()
                .map(|&(k, e)| (f64::from(k), e))
                .collect::<Vec<_>>()
        };
        let series = vec![
            Series::new("Fisher-adaptive", to_points(&fisher)),
            Series::new("Van-Trees-adaptive", to_points(&vantrees)).marker(Marker::Square),
        ];
        let svg = render_plot(
            "Adaptive schedules: mean error per step",
            "measurement step",
            "mean squared error (rad^2)",
            &series,
        );
        files.push(write_artifact(dir, "fig2.svg", &svg)?);
    }
    Ok(files)
}

// ---------------------------------------------------------------------------
// scaling — fixed-measurement 1/n constants
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ScalingPayload {
    c_fisher: f64,
    c_vantrees: f64,
    ratio: f64,
    fisher: AdaptiveRunReport,
    vantrees: AdaptiveRunReport,
}

pub fn cmd_scaling(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>, CliError> {
    guard_formats(cfg, &["csv", "json", "svg"])?;
    let model = build_model(cfg, cfg.model.alpha)?;
    let n = cfg.adaptive.n;

    let fisher = run_fixed_povm(&model, n, FixedVariant::Fisher).map_err(map_adaptive)?;
    let vantrees = run_fixed_povm(&model, n, FixedVariant::VanTrees).map_err(map_adaptive)?;
    let c_fisher = fisher.fitted_constant.unwrap_or(f64::NAN);
    let c_vantrees = vantrees.fitted_constant.unwrap_or(f64::NAN);

    let rows: Vec<Vec<Cell>> = fisher
        .error_curve
        .iter()
        .zip(&vantrees.error_curve)
        .map(|(&(k, ef), &(_, ev))| {
            let kf = f64::from(k);
            vec![
                Cell::Int(u64::from(k)),
                Cell::Float(kf * ef),
                Cell::Float(kf * ev),
            ]
        })
        .collect();

    let dir = Path::new(&cfg.output.dir);
    let mut files = Vec::new();
    if wants(cfg, "csv") {
        let text = render_csv(
            cfg,
            &["n", "n_times_err_fisher", "n_times_err_vantrees"],
            &rows,
        );
        files.push(write_artifact(dir, "scaling.csv", &text)?);
    }
    if wants(cfg, "json") {
        let payload = ScalingPayload {
            c_fisher,
            c_vantrees,
            ratio: c_fisher / c_vantrees,
            fisher: fisher.clone(),
            vantrees: vantrees.clone(),
        };
        files.push(write_artifact(
            dir,
            "scaling.json",
            &render_json(cfg, &payload)?,
        )?);
    }
    if wants(cfg, "svg") {
        let scaled = |r: &AdaptiveRunReport| {
            r.error_curve
                .iter()
                .map(|&(k, e)| (f64::from(k), f64::from(k) * e))
                .collect::<Vec<_>>()
        };
        let series = vec![
            Series::new(
                &format!("Fisher fixed (c = {c_fisher:.3})"),
                scaled(&fisher),
            ),
            Series::new(
                &format!("Van Trees fixed (c = {c_vantrees:.3})"),
                scaled(&vantrees),
            )
            .marker(Marker::Square),
        ];
        let svg = render_plot(
            "Fixed measurement: n x mean squared error",
            "number of measurements n",
            "n x error (rad^2)",
            &series,
        );
        files.push(write_artifact(dir, "scaling.svg", &svg)?);
    }
    Ok(files)
}

// ---------------------------------------------------------------------------
// zq-single — one (alpha, prior) point, full optimizer reports
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ZqSinglePayload {
    alpha: f64,
    dim: usize,
    /// Gaussian priors only; `null` for a flat prior.
    zq_analytic: Option<f64>,
    vq: f64,
    restricted: OptimizationReport,
    montecarlo: OptimizationReport,
}

pub fn cmd_zq_single(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>, CliError> {
    guard_formats(cfg, &["json"])?;
    let model = build_model(cfg, cfg.model.alpha)?;
    let prior = build_prior(cfg)?;

    let restricted = optimize_restricted(&model, &prior);
    let montecarlo = optimize_montecarlo(&model, &prior, cfg.optimizer.budget, cfg.optimizer.seed)
        .map_err(map_optimizer)?;
    require_converged(&montecarlo, &format!("alpha = {}", cfg.model.alpha))?;

    let payload = ZqSinglePayload {
        alpha: cfg.model.alpha,
        dim: model.dim(),
        zq_analytic: (cfg.prior.kind == "gaussian")
            .then(|| zq_restricted_analytic(&model, cfg.prior.sigma)),
        vq: generalized_qfi_vq(&model, &prior),
        restricted,
        montecarlo,
    };

    let dir = Path::new(&cfg.output.dir);
    Ok(vec![write_artifact(
        dir,
        "zq_single.json",
        &render_json(cfg, &payload)?,
    )?])
}

// ---------------------------------------------------------------------------
// adaptive-single — one schedule, error curve only
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AdaptiveSinglePayload {
    report: AdaptiveRunReport,
}

pub fn cmd_adaptive_single(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>, CliError> {
    guard_formats(cfg, &["csv", "json", "svg"])?;
    let model = build_model(cfg, cfg.model.alpha)?;
    let n = cfg.adaptive.n;

    let report = match cfg.adaptive.scheme.as_str() {
        "vantrees" => run_vantrees_adaptive(&model, n),
        "fixed" => {
            let variant = if cfg.adaptive.variant == "vantrees" {
                FixedVariant::VanTrees
            } else {
                FixedVariant::Fisher
            };
            run_fixed_povm(&model, n, variant)
        }
        _ => {
            let theta_grid = uniform_theta_grid(cfg.grid.theta_points);
            run_fisher_adaptive(&model, n, &theta_grid, &fisher_options(cfg))
        }
    }
    .map_err(map_adaptive)?;

    let rows: Vec<Vec<Cell>> = report
        .error_curve
        .iter()
        .map(|&(k, e)| vec![Cell::Int(u64::from(k)), Cell::Float(e)])
        .collect();

    let dir = Path::new(&cfg.output.dir);
    let mut files = Vec::new();
    if wants(cfg, "csv") {
        let text = render_csv(cfg, &["step", "error"], &rows);
        files.push(write_artifact(dir, "adaptive_single.csv", &text)?);
    }
    if wants(cfg, "json") {
        let payload = AdaptiveSinglePayload {
            report: report.clone(),
        };
        files.push(write_artifact(
            dir,
            "adaptive_single.json",
            &render_json(cfg, &payload)?,
        )?);
    }
    if wants(cfg, "svg") {
        let points: Vec<(f64, f64)> = report
            .error_curve
            .iter()
            .map(|&(k, e)| (f64::from(k), e))
            .collect();
        let series = vec![Series::new(&cfg.adaptive.scheme, points)];
        let svg = render_plot(
            "Schedule error curve",
            "measurement step",
            "mean squared error (rad^2)",
            &series,
        );
        files.push(write_artifact(dir, "adaptive_single.svg", &svg)?);
    }
    Ok(files)
}
