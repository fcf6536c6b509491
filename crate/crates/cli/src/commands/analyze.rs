use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use qru_core::analysis::{evenness_gap, expressibility_kl_at, hypothesis_curve, spectrum_fit};
use qru_core::circuit::{CircuitSpec, EncodingScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::check_outputs;
use crate::config::parse_angle;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::{num, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnalysisKind {
    /// `x,h` table of the hypothesis function.
    Curve,
    /// `freq,cos,sin` integer-frequency fit of the hypothesis function.
    Spectrum,
    /// `axes,ppi,depth,kl` expressibility per depth.
    Expressibility,
    /// `draw,gap` parity violation per random parameter draw.
    Evenness,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    kind: AnalysisKind,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value = "xyx")]
    axes: String,
    #[arg(long, default_value_t = 3)]
    ppi: usize,
    /// Fix every input scaling to 1 so the spectrum has integer frequencies.
    #[arg(long)]
    unit_scaling: bool,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long, default_value = "-pi", allow_hyphen_values = true)]
    lo: String,
    #[arg(long, default_value = "pi", allow_hyphen_values = true)]
    hi: String,
    /// Highest fitted frequency; defaults to the depth.
    #[arg(long)]
    max_freq: Option<usize>,
    /// Depths for the expressibility table.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    depths: Vec<usize>,
    #[arg(long, default_value_t = 5000)]
    pairs: usize,
    #[arg(long, default_value_t = 75)]
    bins: usize,
    /// Data input held fixed while sampling expressibility.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    input: String,
    /// Random parameter draws for the evenness table.
    #[arg(long, default_value_t = 50)]
    draws: usize,
}

fn spec(depth: usize, axes: &str, ppi: usize) -> CliResult<CircuitSpec> {
    Ok(CircuitSpec::new(depth, 1, EncodingScheme::from_axes(axes, ppi)?)?)
}

fn angle(flag: &str, v: &str) -> CliResult<f64> {
    parse_angle(v).ok_or_else(|| CliError::usage(format!("--{flag}: cannot read '{v}' as an angle")))
}

/// Uniform draws on `[0, 2π)`, optionally with unit input scaling.
fn draw_params(sp: &CircuitSpec, rng: &mut ChaCha8Rng, unit_scaling: bool) -> Vec<f64> {
    let mut p: Vec<f64> = (0..sp.param_count()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    if unit_scaling {
        let ppi = sp.scheme.params_per_input;
        for base in (0..p.len()).step_by(ppi) {
            match ppi {
                3 | 4 => p[base + 1] = 1.0,
                5 => {
                    p[base + 1] = 0.0;
                    p[base + 2] = 1.0;
                }
                _ => {}
            }
        }
    }
    p
}

pub fn run(a: AnalyzeArgs) -> CliResult<()> {
    let config = json!({
        "kind": format!("{:?}", a.kind).to_lowercase(),
        "depth": a.depth,
        "axes": a.axes,
        "ppi": a.ppi,
        "unit_scaling": a.unit_scaling,
        "points": a.points,
        "lo": a.lo,
        "hi": a.hi,
        "max_freq": a.max_freq,
        "depths": a.depths,
        "pairs": a.pairs,
        "bins": a.bins,
        "input": a.input,
        "draws": a.draws,
    });
    let (lo, hi) = (angle("lo", &a.lo)?, angle("hi", &a.hi)?);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut summary = serde_json::Value::Null;

    let (table, manifest) = match a.kind {
        AnalysisKind::Curve | AnalysisKind::Spectrum => {
            let sp = spec(a.depth, &a.axes, a.ppi)?;
            let max_freq = a.max_freq.unwrap_or(a.depth);
            if a.kind == AnalysisKind::Spectrum && a.points < 2 * max_freq + 1 {
                return Err(CliError::usage(format!("--points must be at least {} for --max-freq {max_freq}", 2 * max_freq + 1)));
            }
            check_outputs(&[&a.out])?;
            let manifest = RunManifest::begin("analyze", a.seed, config, &[&a.out])?;
            let params = draw_params(&sp, &mut rng, a.unit_scaling);
            let curve = hypothesis_curve(&sp, &params, (lo, hi), a.points)?;
            let t = if a.kind == AnalysisKind::Curve {
                let mut t = Table::new(&["x", "h"]);
                for (x, h) in curve.xs.iter().zip(&curve.hs) {
                    t.row(vec![num(*x), num(*h)]);
                }
                t
            } else {
                let fit = spectrum_fit(&curve, max_freq)?;
                let mut t = Table::new(&["freq", "cos", "sin"]);
                for w in 0..=max_freq {
                    t.row(vec![w.to_string(), num(fit.cos[w]), num(fit.sin[w])]);
                }
                println!("residual rms {:e}", fit.residual_rms);
                summary = json!({ "residual_rms": fit.residual_rms, "params": params });
                t
            };
            (t, manifest)
        }
        AnalysisKind::Expressibility => {
            if a.depths.is_empty() || a.depths.contains(&0) {
                return Err(CliError::usage("--depths needs positive depths"));
            }
            let input = angle("input", &a.input)?;
            let specs = a.depths.iter().map(|&d| spec(d, &a.axes, a.ppi)).collect::<CliResult<Vec<_>>>()?;
            if a.pairs < 100 || a.bins < 2 {
                return Err(CliError::usage("expressibility needs --pairs >= 100 and --bins >= 2"));
            }
            check_outputs(&[&a.out])?;
            let manifest = RunManifest::begin("analyze", a.seed, config, &[&a.out])?;
            let mut t = Table::new(&["axes", "ppi", "depth", "kl"]);
            for (sp, d) in specs.iter().zip(&a.depths) {
                let kl: f64 = expressibility_kl_at(sp, input, a.pairs, a.bins, a.seed)?;
                t.row(vec![a.axes.clone(), a.ppi.to_string(), d.to_string(), num(kl)]);
            }
            (t, manifest)
        }
        AnalysisKind::Evenness => {
            let sp = spec(a.depth, &a.axes, a.ppi)?;
            if lo != -hi {
                return Err(CliError::usage("evenness needs --lo = -(--hi)"));
            }
            if a.draws == 0 {
                return Err(CliError::usage("--draws must be at least 1"));
            }
            check_outputs(&[&a.out])?;
            let manifest = RunManifest::begin("analyze", a.seed, config, &[&a.out])?;
            let mut t = Table::new(&["draw", "gap"]);
            let mut worst = 0.0f64;
            for i in 0..a.draws {
                let p = draw_params(&sp, &mut rng, a.unit_scaling);
                let g = evenness_gap(&sp, &p, (lo, hi), a.points)?;
                worst = worst.max(g);
                t.row(vec![i.to_string(), num(g)]);
            }
            println!("largest evenness gap {worst:e}");
            summary = json!({ "max_gap": worst });
            (t, manifest)
        }
    };
    table.save(&a.out)?;
    manifest.finish(summary)
}
