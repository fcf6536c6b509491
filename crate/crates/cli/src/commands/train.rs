use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use super::{check_outputs, config_json, RunArgs};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::{num, write_atomic, Table};
use crate::pipeline::{load_data, train_run};

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// JSON report with final metrics and parameters.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch curves CSV.
    #[arg(long)]
    curves: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    final_train_loss: f64,
    final_test_loss: f64,
    final_train_acc: f64,
    final_test_acc: f64,
    trainability: f64,
    initial_params: &'a [f64],
    final_params: &'a [f64],
}

pub const CURVE_HEADER: [&str; 5] = ["epoch", "train_loss", "test_loss", "train_acc", "test_acc"];

pub fn run(a: TrainArgs) -> CliResult<()> {
    let cfg = a.run.resolve()?;
    let mut outs = vec![a.out.as_path()];
    outs.extend(a.curves.as_deref());
    check_outputs(&outs)?;
    let ds = load_data(&a.run.data, cfg.n_classes())?;
    let manifest = RunManifest::begin("train", cfg.seed, config_json(&cfg), &outs)?;

    let (_, rep, _) = train_run(&ds, &cfg)?;
    let report = Report {
        config: &cfg,
        final_train_loss: rep.final_train_loss(),
        final_test_loss: rep.final_test_loss(),
        final_train_acc: rep.final_train_acc(),
        final_test_acc: rep.final_test_acc(),
        trainability: rep.trainability,
        initial_params: &rep.initial_params,
        final_params: &rep.final_params,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::data(e.to_string()))?;
    text.push('\n');
    write_atomic(&a.out, text.as_bytes())?;

    if let Some(path) = &a.curves {
        let mut t = Table::new(&CURVE_HEADER);
        for e in 0..rep.train_loss.len() {
            t.row(vec![
                (e + 1).to_string(),
                num(rep.train_loss[e]),
                num(rep.test_loss[e]),
                num(rep.train_acc[e]),
                num(rep.test_acc[e]),
            ]);
        }
        t.save(path)?;
    }
    println!(
        "test accuracy {:.4}  test loss {:.4}  trainability {:.4}",
        report.final_test_acc, report.final_test_loss, report.trainability
    );
    manifest.finish(json!({ "wall_time_s": rep.wall_time, "final_test_acc": report.final_test_acc }))
}
