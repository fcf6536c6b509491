use std::path::PathBuf;

use clap::Args;
use qru_core::dataio::Dataset;
use qru_core::hpo::{bayes_search, hyperband_search, BayesOptions, HpoConfig, HpoSpace, HyperbandOptions, SearchHistory};
use serde_json::json;

use super::{check_outputs, config_json, RunArgs};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::{num, Table};
use crate::pipeline::{load_data, test_mse};

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also search over the [−π, π] and [0, 2π] normalizations.
    #[arg(long)]
    with_normalization: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 50)]
    n_calls: usize,
    #[arg(long, default_value_t = 4.0)]
    kappa: f64,
    #[arg(long, default_value_t = 10)]
    n_initial: usize,
    /// Training epochs per evaluation.
    #[arg(long, default_value_t = 30)]
    epochs: usize,
}

#[derive(Debug, Args)]
pub struct HyperbandArgs {
    #[command(flatten)]
    search: SearchArgs,
    /// Largest per-configuration budget, in epochs.
    #[arg(long, default_value_t = 30)]
    max_budget: usize,
    #[arg(long, default_value_t = 3)]
    eta: usize,
}

/// Trains the grid point on top of `base` for `epochs` and returns the test MSE.
fn objective(ds: &Dataset, base: &RunConfig, c: &HpoConfig, epochs: usize) -> CliResult<f64> {
    let mut cfg = base.clone();
    cfg.depth = c.depth;
    cfg.lr = c.lr;
    cfg.loss.kind = c.loss.name().to_string();
    cfg.loss.delta = 1.0;
    cfg.optimizer = c.optimizer.name().to_string();
    if let Some((lo, hi)) = c.normalization {
        cfg.normalization.lo = lo;
        cfg.normalization.hi = hi;
    }
    cfg.epochs = epochs;
    test_mse(ds, &cfg)
}

fn space(a: &SearchArgs) -> HpoSpace {
    let s = HpoSpace::standard();
    if a.with_normalization {
        s.with_normalization()
    } else {
        s
    }
}

fn history_table(h: &SearchHistory, base: &RunConfig, hyperband: bool) -> Table {
    let mut header = vec!["trial", "depth", "lr", "loss", "optimizer", "norm_lo", "norm_hi", "budget"];
    if hyperband {
        header.extend(["bracket", "rung"]);
    }
    header.extend(["objective", "best_so_far"]);
    let mut t = Table::new(&header);
    for tr in &h.trials {
        let (lo, hi) = tr.config.normalization.unwrap_or(base.norm_range());
        let mut cells = vec![
            tr.index.to_string(),
            tr.config.depth.to_string(),
            num(tr.config.lr),
            tr.config.loss.name().to_string(),
            tr.config.optimizer.name().to_string(),
            num(lo),
            num(hi),
            tr.budget.to_string(),
        ];
        if hyperband {
            cells.push(tr.bracket.map_or(String::new(), |b| b.to_string()));
            cells.push(tr.rung.map_or(String::new(), |r| r.to_string()));
        }
        cells.extend([num(tr.objective), num(tr.best_so_far)]);
        t.row(cells);
    }
    t
}

fn best_json(h: &SearchHistory) -> serde_json::Value {
    match h.best() {
        Some(b) => json!({
            "trial": b.index,
            "depth": b.config.depth,
            "lr": b.config.lr,
            "loss": b.config.loss.name(),
            "optimizer": b.config.optimizer.name(),
            "normalization": b.config.normalization,
            "objective": b.objective,
        }),
        None => serde_json::Value::Null,
    }
}

fn report_best(h: &SearchHistory) {
    if let Some(b) = h.best() {
        println!(
            "best trial {}: depth {} lr {} loss {} optimizer {} -> test mse {:.5}",
            b.index,
            b.config.depth,
            b.config.lr,
            b.config.loss,
            b.config.optimizer.name(),
            b.objective
        );
    }
}

pub fn run_bayes(a: BayesArgs) -> CliResult<()> {
    let base = a.search.run.resolve()?;
    if a.epochs == 0 {
        return Err(CliError::usage("--epochs must be at least 1"));
    }
    if !(a.kappa >= 0.0 && a.kappa.is_finite()) {
        return Err(CliError::usage("--kappa must be non-negative"));
    }
    if a.n_initial == 0 || a.n_initial >= a.n_calls {
        return Err(CliError::usage("need 0 < --n-initial < --n-calls"));
    }
    let space = space(&a.search);
    let opts = BayesOptions { n_calls: a.n_calls, kappa: a.kappa, seed: base.seed, n_initial: a.n_initial, budget: a.epochs, ..Default::default() };
    check_outputs(&[&a.search.out])?;
    let ds = load_data(&a.search.run.data, base.n_classes())?;
    let config = json!({
        "base": config_json(&base),
        "n_calls": a.n_calls,
        "kappa": a.kappa,
        "n_initial": a.n_initial,
        "epochs": a.epochs,
        "grid_size": space.grid_size(),
    });
    let manifest = RunManifest::begin("bayes", base.seed, config, &[&a.search.out])?;

    let failure = std::sync::Mutex::new(None);
    let result = bayes_search(
        &space,
        |c| {
            objective(&ds, &base, c, a.epochs).map_err(|e| {
                let msg = e.to_string();
                failure.lock().expect("lock").get_or_insert(e);
                qru_core::QruError::Numeric(msg)
            })
        },
        &opts,
    );
    let h = settle(result, failure)?;
    if h.capped {
        eprintln!("qru: --n-calls exceeds the {} grid points; stopped after exhausting the grid", space.grid_size());
    }
    history_table(&h, &base, false).save(&a.search.out)?;
    report_best(&h);
    manifest.finish(json!({ "capped": h.capped, "best": best_json(&h) }))
}

pub fn run_hyperband(a: HyperbandArgs) -> CliResult<()> {
    let base = a.search.run.resolve()?;
    let space = space(&a.search);
    let opts = HyperbandOptions { max_budget: a.max_budget, eta: a.eta, seed: base.seed };
    qru_core::hpo::bracket_schedule(a.max_budget, a.eta)?;
    check_outputs(&[&a.search.out])?;
    let ds = load_data(&a.search.run.data, base.n_classes())?;
    let config = json!({ "base": config_json(&base), "max_budget": a.max_budget, "eta": a.eta, "grid_size": space.grid_size() });
    let manifest = RunManifest::begin("hyperband", base.seed, config, &[&a.search.out])?;

    let failure = std::sync::Mutex::new(None);
    let result = hyperband_search(
        &space,
        |c, budget| {
            objective(&ds, &base, c, budget).map_err(|e| {
                let msg = e.to_string();
                failure.lock().expect("lock").get_or_insert(e);
                qru_core::QruError::Numeric(msg)
            })
        },
        &opts,
    );
    let h = settle(result, failure)?;
    history_table(&h, &base, true).save(&a.search.out)?;
    report_best(&h);
    let brackets: Vec<_> = h
        .brackets
        .iter()
        .map(|b| json!({ "s": b.plan.s, "n": b.plan.n, "r": b.plan.r, "rungs": b.rungs.iter().map(|r| [r.n_configs, r.budget, r.kept]).collect::<Vec<_>>() }))
        .collect();
    manifest.finish(json!({ "brackets": brackets, "best": best_json(&h) }))
}

/// Prefers the original training error over the one relayed through the search.
fn settle(result: qru_core::Result<SearchHistory>, failure: std::sync::Mutex<Option<CliError>>) -> CliResult<SearchHistory> {
    match result {
        Ok(h) => Ok(h),
        Err(e) => Err(failure.into_inner().expect("lock").unwrap_or_else(|| e.into())),
    }
}
