use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use super::sweep::METRIC_HEADER;
use super::{check_outputs, config_json, RunArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::{num, Table};
use crate::pipeline::{load_data, train_run};

#[derive(Debug, Args)]
pub struct VariabilityArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    /// Standard deviation of the Gaussian(0.5, σ) initialization.
    #[arg(long, default_value_t = 0.1)]
    std: f64,
    /// Give every run the base seed instead of `seed + run`.
    #[arg(long)]
    fixed_seed: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run(a: VariabilityArgs) -> CliResult<()> {
    let mut base = a.run.resolve()?;
    if a.runs < 2 {
        return Err(CliError::usage("--runs must be at least 2"));
    }
    if !(a.std >= 0.0 && a.std.is_finite()) {
        return Err(CliError::usage("--std must be non-negative"));
    }
    base.init.kind = "gaussian".into();
    base.init.mean = 0.5;
    base.init.std = a.std;
    base.train_config()?;
    check_outputs(&[&a.out])?;
    let ds = load_data(&a.run.data, base.n_classes())?;
    let config = json!({ "base": config_json(&base), "runs": a.runs, "std": a.std, "fixed_seed": a.fixed_seed });
    let manifest = RunManifest::begin("variability", base.seed, config, &[&a.out])?;

    let seeds: Vec<u64> = (0..a.runs as u64).map(|i| if a.fixed_seed { base.seed } else { base.seed + i }).collect();
    let rows: Vec<[f64; 5]> = seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = base.clone();
            cfg.seed = seed;
            let (_, rep, _) = train_run(&ds, &cfg)?;
            Ok([
                rep.final_train_loss(),
                rep.final_test_loss(),
                rep.final_train_acc(),
                rep.final_test_acc(),
                rep.trainability,
            ])
        })
        .collect::<CliResult<_>>()?;

    let mut header = vec!["run", "seed"];
    header.extend(METRIC_HEADER);
    let mut t = Table::new(&header);
    for (i, (seed, r)) in seeds.iter().zip(&rows).enumerate() {
        let mut cells = vec![i.to_string(), seed.to_string()];
        cells.extend(r.iter().map(|&v| num(v)));
        t.row(cells);
    }
    let stats: Vec<(f64, f64)> = (0..5).map(|c| mean_std(&rows.iter().map(|r| r[c]).collect::<Vec<_>>())).collect();
    for (label, pick) in [("mean", 0), ("std", 1)] {
        let mut cells = vec![label.to_string(), String::new()];
        cells.extend(stats.iter().map(|s| num(if pick == 0 { s.0 } else { s.1 })));
        t.row(cells);
    }
    t.save(&a.out)?;
    println!(
        "test accuracy {:.4} ± {:.4}  test loss {:.4} ± {:.4}",
        stats[3].0, stats[3].1, stats[1].0, stats[1].1
    );
    manifest.finish(json!({
        "test_acc_mean": stats[3].0,
        "test_acc_std": stats[3].1,
        "test_loss_mean": stats[1].0,
        "test_loss_std": stats[1].1,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_statistics() {
        assert_eq!(mean_std(&[2.0, 2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
