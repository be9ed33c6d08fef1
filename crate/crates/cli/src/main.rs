//! `vantrees-lab` — batch experiment runner for Bayesian phase estimation.
//!
//! Thin shell around the library: parse arguments, run, map errors to exit
//! codes (0 success, 2 config error, 3 convergence failure, 1 otherwise).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vantrees_lab::{run, Experiment, Overrides};

#[derive(Parser)]
#[command(
    name = "vantrees-lab",
    version,
    about = "Bayesian quantum phase-estimation experiments",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Amplitude sweep of analytic/Monte-Carlo/V_Q information (fig1.csv, fig1.svg)
    Fig1(RunArgs),
    /// Fisher-adaptive vs Van-Trees-adaptive error curves (fig2.csv, fig2.svg)
    Fig2(RunArgs),
    /// Fixed-measurement 1/n scaling constants (scaling.csv, scaling.json, scaling.svg)
    Scaling(RunArgs),
    /// One (alpha, prior) point with full POVM output (zq_single.json)
    ZqSingle(RunArgs),
    /// One schedule's error curve (adaptive_single.csv/.json/.svg)
    AdaptiveSingle(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (TOML)
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Override the RNG seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Override the amplitude (for fig1: collapse the sweep to this value)
    #[arg(long, value_name = "X")]
    alpha: Option<f64>,
    /// Override the Gaussian prior width
    #[arg(long, value_name = "X")]
    sigma: Option<f64>,
    /// Override the number of measurements / steps
    #[arg(long, value_name = "K")]
    n: Option<u32>,
    /// Permit fig2 runs with n > 12 (the outcome tree doubles per step)
    #[arg(long)]
    allow_large_n: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Fig1(a) => (Experiment::Fig1, a),
        Command::Fig2(a) => (Experiment::Fig2, a),
        Command::Scaling(a) => (Experiment::Scaling, a),
        Command::ZqSingle(a) => (Experiment::ZqSingle, a),
        Command::AdaptiveSingle(a) => (Experiment::AdaptiveSingle, a),
    };
    let overrides = Overrides {
        seed: args.seed,
        out: args.out,
        alpha: args.alpha,
        sigma: args.sigma,
        n: args.n,
        allow_large_n: args.allow_large_n,
    };
    match run(experiment, &args.config, &overrides) {
        Ok(files) => {
            for file in files {
                println!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
