use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use qru_core::training::OptimizerKind;
use rayon::prelude::*;
use serde_json::json;

use super::{check_outputs, config_json, RunArgs};
use crate::config::{parse_loss, parse_norm_range, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::{num, Table};
use crate::pipeline::{load_data, train_run};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepDim {
    Depth,
    Lr,
    #[value(name = "batch_size")]
    BatchSize,
    Optimizer,
    Loss,
    /// `pm-pi`, `0-2pi` or `lo:hi`.
    Normalization,
    /// Three-letter axis layout such as `xyx` or `xyz`.
    Scheme,
    Ppi,
}

impl SweepDim {
    fn name(self) -> &'static str {
        match self {
            SweepDim::Depth => "depth",
            SweepDim::Lr => "lr",
            SweepDim::BatchSize => "batch_size",
            SweepDim::Optimizer => "optimizer",
            SweepDim::Loss => "loss",
            SweepDim::Normalization => "normalization",
            SweepDim::Scheme => "scheme",
            SweepDim::Ppi => "ppi",
        }
    }

    /// Sets this dimension on `cfg`.
    fn apply(self, cfg: &mut RunConfig, value: &str) -> CliResult<()> {
        let bad = || CliError::usage(format!("invalid {} value '{value}'", self.name()));
        let int = || value.parse::<usize>().map_err(|_| bad());
        match self {
            SweepDim::Depth => cfg.depth = int()?,
            SweepDim::BatchSize => cfg.batch_size = int()?,
            SweepDim::Ppi => cfg.scheme.ppi = int()?,
            SweepDim::Lr => cfg.lr = value.parse().map_err(|_| bad())?,
            SweepDim::Optimizer => {
                value.parse::<OptimizerKind>().map_err(|_| bad())?;
                cfg.optimizer = value.to_string();
            }
            SweepDim::Loss => {
                parse_loss(value, cfg.loss.delta)?;
                cfg.loss.kind = value.to_string();
            }
            SweepDim::Normalization => {
                let (lo, hi) = parse_norm_range(value).ok_or_else(bad)?;
                cfg.normalization.lo = lo;
                cfg.normalization.hi = hi;
            }
            SweepDim::Scheme => cfg.scheme.axes = value.to_string(),
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum)]
    dim: SweepDim,
    /// Comma-separated values of `--dim`.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    /// Optional second dimension; the grid is the Cartesian product.
    #[arg(long, value_enum, requires = "values2")]
    dim2: Option<SweepDim>,
    #[arg(long, value_delimiter = ',', requires = "dim2")]
    values2: Vec<String>,
    /// Runs per grid point; repeat `k` uses seed `seed + k`.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long)]
    out: PathBuf,
}

struct Job {
    cfg: RunConfig,
    cells: Vec<String>,
}

pub const METRIC_HEADER: [&str; 5] = ["final_train_loss", "final_test_loss", "final_train_acc", "final_test_acc", "trainability"];

pub fn run(a: SweepArgs) -> CliResult<()> {
    let base = a.run.resolve()?;
    if a.repeats == 0 {
        return Err(CliError::usage("--repeats must be at least 1"));
    }
    if a.dim2 == Some(a.dim) {
        return Err(CliError::usage("--dim2 must differ from --dim"));
    }
    let values: Vec<String> = a.values.iter().map(|v| v.trim().to_string()).collect();
    let values2: Vec<Option<String>> = match a.dim2 {
        Some(_) => a.values2.iter().map(|v| Some(v.trim().to_string())).collect(),
        None => vec![None],
    };

    // Build and validate every configuration before touching the filesystem.
    let mut jobs = Vec::new();
    for v in &values {
        for v2 in &values2 {
            for k in 0..a.repeats {
                let mut cfg = base.clone();
                a.dim.apply(&mut cfg, v)?;
                let mut cells = vec![a.dim.name().to_string(), v.clone()];
                if let (Some(d2), Some(v2)) = (a.dim2, v2) {
                    d2.apply(&mut cfg, v2)?;
                    cells.extend([d2.name().to_string(), v2.clone()]);
                }
                cfg.seed = base.seed + k as u64;
                cfg.train_config()?;
                cells.extend([k.to_string(), cfg.seed.to_string()]);
                jobs.push(Job { cfg, cells });
            }
        }
    }
    check_outputs(&[&a.out])?;
    let ds = load_data(&a.run.data, base.n_classes())?;
    let config = json!({
        "base": config_json(&base),
        "dim": a.dim.name(),
        "values": values,
        "dim2": a.dim2.map(SweepDim::name),
        "values2": a.values2,
        "repeats": a.repeats,
    });
    let manifest = RunManifest::begin("sweep", base.seed, config, &[&a.out])?;

    let results: Vec<(Vec<String>, f64)> = jobs
        .par_iter()
        .map(|job| {
            let start = Instant::now();
            let (_, rep, _) = train_run(&ds, &job.cfg)?;
            let metrics = vec![
                num(rep.final_train_loss()),
                num(rep.final_test_loss()),
                num(rep.final_train_acc()),
                num(rep.final_test_acc()),
                num(rep.trainability),
            ];
            Ok((metrics, start.elapsed().as_secs_f64()))
        })
        .collect::<CliResult<_>>()?;

    let mut header = vec!["dim", "value"];
    if a.dim2.is_some() {
        header.extend(["dim2", "value2"]);
    }
    header.extend(["repeat", "seed"]);
    header.extend(METRIC_HEADER);
    let mut t = Table::new(&header);
    let mut times = Vec::with_capacity(jobs.len());
    for (job, (metrics, secs)) in jobs.iter().zip(results) {
        let mut cells = job.cells.clone();
        cells.extend(metrics);
        t.row(cells);
        times.push(secs);
    }
    t.save(&a.out)?;
    println!("{} runs written to {}", jobs.len(), a.out.display());
    manifest.finish(json!({ "rows": jobs.len(), "wall_time_s": times }))
}
