mod analyze;
mod gen_data;
mod hpo;
mod sweep;
mod train;
mod variability;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::check_writable;

#[derive(Debug, Parser)]
#[command(name = "qru", version, about = "Single-qubit data re-uploading classifier lab")]
pub struct Cli {
    /// Worker threads for runs that can proceed in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic calorimeter dataset.
    GenData(gen_data::GenDataArgs),
    /// Train once and report curves and final metrics.
    Train(train::TrainArgs),
    /// Train over a grid of one or two hyperparameters.
    Sweep(sweep::SweepArgs),
    /// Repeat a run with reshuffled data and random initialization.
    Variability(variability::VariabilityArgs),
    /// Gaussian-process Bayesian hyperparameter search.
    Bayes(hpo::BayesArgs),
    /// Hyperband hyperparameter search.
    Hyperband(hpo::HyperbandArgs),
    /// Circuit diagnostics: hypothesis curve, spectrum, expressibility, evenness.
    Analyze(analyze::AnalyzeArgs),
}

/// Base configuration and data shared by the training commands.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run configuration; defaults are used for missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Labelled feature CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RunArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.train_config()?;
        Ok(cfg)
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    if cli.threads == 0 {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {} threads: {e}", cli.threads)))?;
    pool.install(|| match cli.command {
        Command::GenData(a) => gen_data::run(a),
        Command::Train(a) => train::run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Variability(a) => variability::run(a),
        Command::Bayes(a) => hpo::run_bayes(a),
        Command::Hyperband(a) => hpo::run_hyperband(a),
        Command::Analyze(a) => analyze::run(a),
    })
}

fn check_outputs(paths: &[&Path]) -> CliResult<()> {
    for p in paths {
        check_writable(p)?;
    }
    Ok(())
}

fn config_json(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config is plain data")
}
