use std::path::PathBuf;

use clap::Args;
use qru_core::dataio::{generate_synthetic, write_records_to, SynthConfig};
use serde_json::json;

use super::check_outputs;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::write_atomic;

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    out: PathBuf,
    /// Records per class.
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Per-feature standard deviation around the class means.
    #[arg(long)]
    spread: Option<f64>,
    /// Widens the spread by a factor `1 + overlap`.
    #[arg(long)]
    overlap: Option<f64>,
}

pub fn run(a: GenDataArgs) -> CliResult<()> {
    let mut cfg = SynthConfig { n_per_class: a.n, ..Default::default() };
    if let Some(s) = a.spread {
        if s <= 0.0 {
            return Err(CliError::usage("--spread must be positive"));
        }
        cfg.spread = s;
    }
    if let Some(o) = a.overlap {
        cfg.overlap = o;
    }
    check_outputs(&[&a.out])?;
    let ds = generate_synthetic(&cfg, a.seed)?;
    let config = json!({ "n_per_class": cfg.n_per_class, "means": cfg.means, "spread": cfg.spread, "overlap": cfg.overlap });
    let manifest = RunManifest::begin("gen-data", a.seed, config, &[&a.out])?;
    let mut body = Vec::new();
    write_records_to(&ds, &mut body)?;
    write_atomic(&a.out, &body)?;
    manifest.finish(json!({ "records": ds.len() }))
}
