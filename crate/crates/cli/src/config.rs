//! Declarative experiment configuration: TOML sections, experiment-specific
//! defaults, command-line overrides, and validation.
//!
//! Resolution order (later wins): built-in defaults for the experiment →
//! config file → command-line flags. The fully resolved configuration is
//! embedded verbatim in every output file so a run can be reproduced from
//! any of its artifacts.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Experiment selector (one per subcommand).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Restricted-vs-Monte-Carlo information over an amplitude sweep.
    Fig1,
    /// Fisher-adaptive vs Van-Trees-adaptive error curves.
    Fig2,
    /// Fixed-measurement 1/n scaling constants.
    Scaling,
    /// Single-point optimizer comparison with full POVM output.
    ZqSingle,
    /// One adaptive/fixed schedule, error curve only.
    AdaptiveSingle,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Scaling => "scaling",
            Experiment::ZqSingle => "zq-single",
            Experiment::AdaptiveSingle => "adaptive-single",
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    /// For `fig1` this collapses the amplitude range to the single value.
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub n: Option<u32>,
    /// Permits `fig2` runs beyond the n ≤ 12 guard.
    pub allow_large_n: bool,
}

// ---------------------------------------------------------------------------
// Raw (file) layer: every key optional, unknown keys rejected.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    pub model: RawModel,
    pub prior: RawPrior,
    pub grid: RawGrid,
    pub optimizer: RawOptimizer,
    pub adaptive: RawAdaptive,
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawModel {
    pub alpha: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub alpha_step: Option<f64>,
    /// Fock truncation; 0 selects the automatic tail-mass rule.
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawPrior {
    /// "flat" or "gaussian".
    pub kind: Option<String>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawGrid {
    /// Prior/posterior grid size M.
    pub points: Option<usize>,
    /// True-phase average grid for the Fisher-adaptive scheme.
    pub theta_points: Option<usize>,
    /// Maximum-likelihood search grid for the Fisher-adaptive scheme.
    pub ml_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawOptimizer {
    pub budget: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawAdaptive {
    pub n: Option<u32>,
    /// "fisher", "vantrees", or "fixed" (adaptive-single only).
    pub scheme: Option<String>,
    /// Fixed-scheme information functional: "fisher" or "vantrees".
    pub variant: Option<String>,
    /// "zero", "random", or "truth".
    pub initial_guess: Option<String>,
    pub exclude_flagged: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawOutput {
    pub dir: Option<String>,
    /// Subset of {"csv", "json", "svg"}.
    pub formats: Option<Vec<String>>,
}

// ---------------------------------------------------------------------------
// Resolved layer: every knob concrete; serialized into output headers.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub experiment: String,
    pub model: ModelSection,
    pub prior: PriorSection,
    pub grid: GridSection,
    pub optimizer: OptimizerSection,
    pub adaptive: AdaptiveSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSection {
    /// Single amplitude used by every experiment except the fig1 sweep.
    pub alpha: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
    /// 0 = automatic truncation from the tail-mass rule.
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorSection {
    pub kind: String,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSection {
    pub points: usize,
    pub theta_points: usize,
    pub ml_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerSection {
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveSection {
    pub n: u32,
    pub scheme: String,
    pub variant: String,
    pub initial_guess: String,
    pub exclude_flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSection {
    pub dir: String,
    pub formats: Vec<String>,
}

impl ResolvedConfig {
    /// Single-line JSON of the whole resolved configuration (header embeds).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("resolved config serializes")
    }

    /// Amplitudes of the fig1 sweep: `alpha_min`, stepping by `alpha_step`,
    /// up to and including `alpha_max` (within a half-step tolerance).
    pub fn alpha_sweep(&self) -> Vec<f64> {
        let (lo, hi, step) = (
            self.model.alpha_min,
            self.model.alpha_max,
            self.model.alpha_step,
        );
        let count = ((hi - lo) / step + 0.5).floor() as usize + 1;
        (0..count).map(|i| lo + step * i as f64).collect()
    }
}

fn defaults(experiment: Experiment) -> ResolvedConfig {
    let (alpha, n, prior_kind) = match experiment {
        Experiment::Fig1 => (1.0, 8, "gaussian"),
        Experiment::Fig2 => (3.0, 8, "flat"),
        Experiment::Scaling => (1.0, 16, "flat"),
        Experiment::ZqSingle => (1.0, 8, "gaussian"),
        Experiment::AdaptiveSingle => (3.0, 8, "flat"),
    };
    ResolvedConfig {
        experiment: experiment.name().to_string(),
        model: ModelSection {
            alpha,
            alpha_min: 0.0,
            alpha_max: 1.0,
            alpha_step: 0.1,
            dim: 0,
        },
        prior: PriorSection {
            kind: prior_kind.to_string(),
            sigma: PI / 4.0,
        },
        grid: GridSection {
            points: 2048,
            theta_points: 181,
            ml_points: 2048,
        },
        optimizer: OptimizerSection {
            budget: 2000,
            seed: 2024,
        },
        adaptive: AdaptiveSection {
            n,
            scheme: "fisher".to_string(),
            variant: "fisher".to_string(),
            initial_guess: "zero".to_string(),
            exclude_flagged: false,
        },
        output: OutputSection {
            dir: "out".to_string(),
            formats: vec!["csv".to_string(), "json".to_string(), "svg".to_string()],
        },
    }
}

/// Parse a TOML config file's text. Syntax errors and unknown keys are
/// config errors (exit code 2).
pub fn parse_config(text: &str) -> Result<RawConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
}

/// Read and parse a config file from disk.
pub fn load_config(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Merge defaults ← file ← flags, then validate for the experiment.
pub fn resolve(
    experiment: Experiment,
    raw: &RawConfig,
    overrides: &Overrides,
) -> Result<ResolvedConfig, CliError> {
    let mut cfg = defaults(experiment);

    if let Some(v) = raw.model.alpha {
        cfg.model.alpha = v;
    }
    if let Some(v) = raw.model.alpha_min {
        cfg.model.alpha_min = v;
    }
    if let Some(v) = raw.model.alpha_max {
        cfg.model.alpha_max = v;
    }
    if let Some(v) = raw.model.alpha_step {
        cfg.model.alpha_step = v;
    }
    if let Some(v) = raw.model.dim {
        cfg.model.dim = v;
    }
    if let Some(v) = &raw.prior.kind {
        cfg.prior.kind = v.clone();
    }
    if let Some(v) = raw.prior.sigma {
        cfg.prior.sigma = v;
    }
    if let Some(v) = raw.grid.points {
        cfg.grid.points = v;
    }
    if let Some(v) = raw.grid.theta_points {
        cfg.grid.theta_points = v;
    }
    if let Some(v) = raw.grid.ml_points {
        cfg.grid.ml_points = v;
    }
    if let Some(v) = raw.optimizer.budget {
        cfg.optimizer.budget = v;
    }
    if let Some(v) = raw.optimizer.seed {
        cfg.optimizer.seed = v;
    }
    if let Some(v) = raw.adaptive.n {
        cfg.adaptive.n = v;
    }
    if let Some(v) = &raw.adaptive.scheme {
        cfg.adaptive.scheme = v.clone();
    }
    if let Some(v) = &raw.adaptive.variant {
        cfg.adaptive.variant = v.clone();
    }
    if let Some(v) = &raw.adaptive.initial_guess {
        cfg.adaptive.initial_guess = v.clone();
    }
    if let Some(v) = raw.adaptive.exclude_flagged {
        cfg.adaptive.exclude_flagged = v;
    }
    if let Some(v) = &raw.output.dir {
        cfg.output.dir = v.clone();
    }
    if let Some(v) = &raw.output.formats {
        cfg.output.formats = v.clone();
    }

    if let Some(seed) = overrides.seed {
        cfg.optimizer.seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.output.dir = out.clone();
    }
    if let Some(alpha) = overrides.alpha {
        cfg.model.alpha = alpha;
        cfg.model.alpha_min = alpha;
        cfg.model.alpha_max = alpha;
    }
    if let Some(sigma) = overrides.sigma {
        cfg.prior.sigma = sigma;
    }
    if let Some(n) = overrides.n {
        cfg.adaptive.n = n;
    }

    validate(experiment, &cfg, overrides.allow_large_n)?;
    Ok(cfg)
}

fn validate(
    experiment: Experiment,
    cfg: &ResolvedConfig,
    allow_large_n: bool,
) -> Result<(), CliError> {
    let bad = |msg: String| Err(CliError::Config(msg));

    if !cfg.model.alpha.is_finite() || cfg.model.alpha < 0.0 {
        return bad(format!(
            "model.alpha must be finite and ≥ 0, got {}",
            cfg.model.alpha
        ));
    }
    if experiment == Experiment::Fig1 {
        let (lo, hi, step) = (
            cfg.model.alpha_min,
            cfg.model.alpha_max,
            cfg.model.alpha_step,
        );
        if !lo.is_finite()
            || !hi.is_finite()
            || !step.is_finite()
            || lo < 0.0
            || hi < lo
            || step <= 0.0
        {
            return bad(format!(
                "model.alpha_min/alpha_max/alpha_step must describe a non-empty range of \
                 amplitudes ≥ 0, got [{lo}, {hi}] step {step}"
            ));
        }
    }
    if !cfg.prior.sigma.is_finite() || cfg.prior.sigma <= 0.0 {
        return bad(format!(
            "prior.sigma must be finite and > 0, got {}",
            cfg.prior.sigma
        ));
    }
    match cfg.prior.kind.as_str() {
        "flat" | "gaussian" => {}
        other => {
            return bad(format!(
                "prior.kind must be \"flat\" or \"gaussian\", got \"{other}\""
            ))
        }
    }
    match experiment {
        Experiment::Fig1 => {
            if cfg.prior.kind != "gaussian" {
                return bad(
                    "fig1 compares against the Gaussian-prior closed form; set prior.kind = \
                     \"gaussian\""
                        .to_string(),
                );
            }
        }
        Experiment::Fig2 | Experiment::Scaling | Experiment::AdaptiveSingle => {
            if cfg.prior.kind != "flat" {
                return bad(format!(
                    "{} starts from a flat prior; set prior.kind = \"flat\"",
                    experiment.name()
                ));
            }
        }
        Experiment::ZqSingle => {}
    }
    if cfg.grid.points < 8 {
        return bad(format!("grid.points must be ≥ 8, got {}", cfg.grid.points));
    }
    if cfg.grid.theta_points < 3 {
        return bad(format!(
            "grid.theta_points must be ≥ 3, got {}",
            cfg.grid.theta_points
        ));
    }
    if cfg.grid.ml_points < 2 {
        return bad(format!(
            "grid.ml_points must be ≥ 2, got {}",
            cfg.grid.ml_points
        ));
    }
    if cfg.optimizer.budget == 0 {
        return bad("optimizer.budget must be ≥ 1".to_string());
    }
    if cfg.adaptive.n == 0 {
        return bad("adaptive.n must be ≥ 1".to_string());
    }
    if experiment == Experiment::Fig2 && cfg.adaptive.n > 12 && !allow_large_n {
        return bad(format!(
            "fig2 with n = {} exceeds the n ≤ 12 guard (the outcome tree doubles per step); \
             pass --allow-large-n to proceed",
            cfg.adaptive.n
        ));
    }
    match cfg.adaptive.scheme.as_str() {
        "fisher" | "vantrees" | "fixed" => {}
        other => {
            return bad(format!(
                "adaptive.scheme must be \"fisher\", \"vantrees\", or \"fixed\", got \"{other}\""
            ))
        }
    }
    match cfg.adaptive.variant.as_str() {
        "fisher" | "vantrees" => {}
        other => {
            return bad(format!(
                "adaptive.variant must be \"fisher\" or \"vantrees\", got \"{other}\""
            ))
        }
    }
    match cfg.adaptive.initial_guess.as_str() {
        "zero" | "random" | "truth" => {}
        other => {
            return bad(format!(
                "adaptive.initial_guess must be \"zero\", \"random\", or \"truth\", got \"{other}\""
            ))
        }
    }
    if cfg.output.dir.is_empty() {
        return bad("output.dir must not be empty".to_string());
    }
    if cfg.output.formats.is_empty() {
        return bad("output.formats must not be empty".to_string());
    }
    for f in &cfg.output.formats {
        match f.as_str() {
            "csv" | "json" | "svg" => {}
            other => {
                return bad(format!(
                    "output.formats entries must be \"csv\", \"json\", or \"svg\", got \"{other}\""
                ))
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_to_experiment_defaults() {
        let raw = parse_config("").unwrap();
        let cfg = resolve(Experiment::Fig1, &raw, &Overrides::default()).unwrap();
        assert_eq!(cfg.experiment, "fig1");
        assert_eq!(cfg.prior.kind, "gaussian");
        assert_eq!(cfg.optimizer.seed, 2024);
        assert_eq!(cfg.alpha_sweep().len(), 11);

        let cfg2 = resolve(Experiment::Fig2, &raw, &Overrides::default()).unwrap();
        assert_eq!(cfg2.prior.kind, "flat");
        assert_eq!(cfg2.model.alpha, 3.0);
        assert_eq!(cfg2.adaptive.n, 8);
    }

    #[test]
    fn file_keys_override_defaults_and_flags_override_files() {
        let raw = parse_config("[optimizer]\nseed = 7\nbudget = 50\n").unwrap();
        let cfg = resolve(Experiment::ZqSingle, &raw, &Overrides::default()).unwrap();
        assert_eq!(cfg.optimizer.seed, 7);
        assert_eq!(cfg.optimizer.budget, 50);

        let ov = Overrides {
            seed: Some(99),
            alpha: Some(0.25),
            ..Overrides::default()
        };
        let cfg = resolve(Experiment::ZqSingle, &raw, &ov).unwrap();
        assert_eq!(cfg.optimizer.seed, 99);
        assert_eq!(cfg.model.alpha, 0.25);
    }

    #[test]
    fn alpha_override_collapses_the_fig1_sweep() {
        let raw = RawConfig::default();
        let ov = Overrides {
            alpha: Some(0.4),
            ..Overrides::default()
        };
        let cfg = resolve(Experiment::Fig1, &raw, &ov).unwrap();
        assert_eq!(cfg.alpha_sweep(), vec![0.4]);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let err = parse_config("[model]\nalhpa = 1.0\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = parse_config("[modle]\nalpha = 1.0\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let cases = [
            "[prior]\nsigma = 0.0\n",
            "[prior]\nkind = \"lorentzian\"\n",
            "[grid]\npoints = 4\n",
            "[optimizer]\nbudget = 0\n",
            "[adaptive]\nn = 0\n",
            "[adaptive]\nscheme = \"oracle\"\n",
            "[output]\nformats = [\"pdf\"]\n",
        ];
        for text in cases {
            let raw = parse_config(text).unwrap();
            let err = resolve(Experiment::ZqSingle, &raw, &Overrides::default()).unwrap_err();
            assert_eq!(err.exit_code(), 2, "case {text:?} should be a config error");
        }
    }

    #[test]
    fn fig2_guard_refuses_large_n_without_the_flag() {
        let raw = parse_config("[adaptive]\nn = 13\n").unwrap();
        let err = resolve(Experiment::Fig2, &raw, &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("allow-large-n"));

        let ov = Overrides {
            allow_large_n: true,
            ..Overrides::default()
        };
        assert!(resolve(Experiment::Fig2, &raw, &ov).is_ok());
    }

    #[test]
    fn fig1_requires_a_gaussian_prior() {
        let raw = parse_config("[prior]\nkind = \"flat\"\n").unwrap();
        let err = resolve(Experiment::Fig1, &raw, &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn sweep_endpoint_is_included_despite_rounding() {
        let raw =
            parse_config("[model]\nalpha_min = 0.0\nalpha_max = 0.3\nalpha_step = 0.1\n").unwrap();
        let cfg = resolve(Experiment::Fig1, &raw, &Overrides::default()).unwrap();
        let sweep = cfg.alpha_sweep();
        assert_eq!(sweep.len(), 4);
        assert!((sweep[3] - 0.3).abs() < 1e-12);
    }
}
