//! Calorimeter feature records: CSV ingestion, min-max normalization,
//! seeded splitting and a synthetic stand-in generator.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{QruError, Result};

pub const CSV_HEADER: [&str; 4] = ["label", "ecal_energy", "shower_length", "hcal_std"];
pub const N_FEATURES: usize = 3;
pub const N_CLASSES: usize = 3;
pub const CLASS_NAMES: [&str; N_CLASSES] = ["electron", "muon", "pion"];

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub label: usize,
    pub features: Vec<f64>,
}

impl Record {
    pub fn new(label: usize, features: Vec<f64>) -> Self {
        Self { label, features }
    }
}

/// Per-feature min-max transform onto `[lo, hi]`, fitted on one dataset.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Normalization {
    #[default]
    None,
    Range {
        lo: f64,
        hi: f64,
        mins: Vec<f64>,
        maxs: Vec<f64>,
    },
}

impl Normalization {
    /// Maps raw feature `f` of value `v`, clipping to `[lo, hi]`.
    pub fn apply(&self, f: usize, v: f64) -> f64 {
        match self {
            Normalization::None => v,
            Normalization::Range { lo, hi, mins, maxs } => {
                let (min, max) = (mins[f], maxs[f]);
                if max <= min {
                    return 0.5 * (lo + hi);
                }
                let t = (v - min) / (max - min);
                (lo * (1.0 - t) + hi * t).clamp(*lo, *hi)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    records: Vec<Record>,
    normalization: Normalization,
}

impl Dataset {
    /// Rejects mixed arities and non-finite features.
    pub fn from_records(records: Vec<Record>) -> Result<Self> {
        if let Some(first) = records.first() {
            let arity = first.features.len();
            for (i, r) in records.iter().enumerate() {
                if r.features.len() != arity {
                    return Err(QruError::Data { row: i + 1, msg: "inconsistent feature arity".into() });
                }
                if !r.features.iter().all(|v| v.is_finite()) {
                    return Err(QruError::Data { row: i + 1, msg: "non-finite feature".into() });
                }
            }
        }
        Ok(Self { records, normalization: Normalization::None })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_features(&self) -> Option<usize> {
        self.records.first().map(|r| r.features.len())
    }

    pub fn normalization(&self) -> &Normalization {
        &self.normalization
    }

    pub fn is_normalized(&self) -> bool {
        !matches!(self.normalization, Normalization::None)
    }

    /// Number of classes implied by the largest label.
    pub fn n_classes(&self) -> usize {
        self.records.iter().map(|r| r.label + 1).max().unwrap_or(0)
    }
}

/// Reads a CSV file with header `label,ecal_energy,shower_length,hcal_std`.
pub fn load_records(path: impl AsRef<Path>, n_classes: usize) -> Result<Dataset> {
    read_records(File::open(path)?, n_classes)
}

pub fn read_records<R: Read>(reader: R, n_classes: usize) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error(1, e))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(QruError::Data {
            row: 1,
            msg: format!("expected header '{}'", CSV_HEADER.join(",")),
        });
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| csv_error(line, e))?;
        if row.len() != CSV_HEADER.len() {
            return Err(QruError::Data {
                row: line,
                msg: format!("expected {} columns, found {}", CSV_HEADER.len(), row.len()),
            });
        }
        let label: usize = row[0].parse().map_err(|_| QruError::Data {
            row: line,
            msg: format!("label '{}' is not a class index", &row[0]),
        })?;
        if label >= n_classes {
            return Err(QruError::Data {
                row: line,
                msg: format!("unknown label {label} (expected 0..{})", n_classes),
            });
        }
        let mut features = Vec::with_capacity(N_FEATURES);
        for (col, cell) in row.iter().enumerate().skip(1) {
            let v: f64 = cell.parse().map_err(|_| QruError::Data {
                row: line,
                msg: format!("column '{}' value '{cell}' is not numeric", CSV_HEADER[col]),
            })?;
            if !v.is_finite() {
                return Err(QruError::Data {
                    row: line,
                    msg: format!("column '{}' is not finite", CSV_HEADER[col]),
                });
            }
            features.push(v);
        }
        records.push(Record { label, features });
    }
    Ok(Dataset { records, normalization: Normalization::None })
}

fn csv_error(row: usize, e: csv::Error) -> QruError {
    QruError::Data { row, msg: e.to_string() }
}

pub fn write_records(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut f = File::create(path)?;
    write_records_to(ds, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn write_records_to<W: Write>(ds: &Dataset, out: &mut W) -> Result<()> {
    if ds.n_features().is_some_and(|n| n != N_FEATURES) {
        return Err(QruError::invalid("CSV format holds exactly three features"));
    }
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for r in &ds.records {
        let cells: Vec<String> = r.features.iter().map(|&v| format_real(v)).collect();
        writeln!(out, "{},{}", r.label, cells.join(","))?;
    }
    Ok(())
}

/// Shortest decimal that parses back to the same value; scientific outside `1e-6..1e17`.
pub fn format_real(v: f64) -> String {
    let exp = if v == 0.0 || !v.is_finite() { 0 } else { v.abs().log10().floor() as i32 };
    if (-6..=16).contains(&exp) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Fits a per-feature min-max map onto `[lo, hi]` and applies it.
///
/// Constant features land on the midpoint. The fitted transform is stored
/// so held-out data can reuse it via [`apply_normalization`].
pub fn normalize(ds: &Dataset, lo: f64, hi: f64) -> Result<Dataset> {
    if ds.is_normalized() {
        return Err(QruError::State("dataset is already normalized".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QruError::invalid(format!("normalization range [{lo}, {hi}] is invalid")));
    }
    let nf = ds
        .n_features()
        .ok_or_else(|| QruError::invalid("cannot fit normalization on an empty dataset"))?;
    let mut mins = vec![f64::INFINITY; nf];
    let mut maxs = vec![f64::NEG_INFINITY; nf];
    for r in &ds.records {
        for (f, &v) in r.features.iter().enumerate() {
            mins[f] = mins[f].min(v);
            maxs[f] = maxs[f].max(v);
        }
    }
    apply_normalization(ds, &Normalization::Range { lo, hi, mins, maxs })
}

/// Applies a previously fitted transform (typically the training set's) to `ds`.
pub fn apply_normalization(ds: &Dataset, norm: &Normalization) -> Result<Dataset> {
    if ds.is_normalized() {
        return Err(QruError::State("dataset is already normalized".into()));
    }
    if let (Normalization::Range { mins, .. }, Some(nf)) = (norm, ds.n_features()) {
        if mins.len() != nf {
            return Err(QruError::layout("normalization arity does not match dataset"));
        }
    }
    let records = ds
        .records
        .iter()
        .map(|r| Record {
            label: r.label,
            features: r.features.iter().enumerate().map(|(f, &v)| norm.apply(f, v)).collect(),
        })
        .collect();
    Ok(Dataset { records, normalization: norm.clone() })
}

/// Seeded Fisher-Yates shuffle, then the first `floor(ratio·N)` records form the training set.
pub fn split_shuffle(ds: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if ds.is_empty() {
        return Err(QruError::invalid("cannot split an empty dataset"));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(QruError::invalid(format!("split ratio {ratio} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut rng);
    let n_train = (ratio * ds.len() as f64).floor() as usize;
    let take = |idx: &[usize]| Dataset {
        records: idx.iter().map(|&i| ds.records[i].clone()).collect(),
        normalization: ds.normalization.clone(),
    };
    Ok((take(&order[..n_train]), take(&order[n_train..])))
}

/// Class-conditional Gaussian blobs over (ECAL energy, shower length, HCAL spread).
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_per_class: usize,
    /// Feature means, one row per class (electron, muon, pion).
    pub means: [[f64; N_FEATURES]; N_CLASSES],
    pub spread: f64,
    pub overlap: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_per_class: 500,
            means: [
                // electron: large ECAL deposit, short shower
                [8.0, 6.0, 1.0],
                // muon: minimum-ionizing, long track
                [1.5, 14.0, 1.5],
                // pion: intermediate ECAL energy, wide hadronic spread
                [4.5, 10.0, 8.0],
            ],
            spread: 1.0,
            overlap: 0.0,
        }
    }
}

/// Draws `n_per_class` records per class, labels in class order.
pub fn generate_synthetic(cfg: &SynthConfig, seed: u64) -> Result<Dataset> {
    if cfg.n_per_class == 0 {
        return Err(QruError::invalid("n_per_class must be positive"));
    }
    if !(cfg.spread >= 0.0 && cfg.spread.is_finite() && cfg.overlap >= 0.0 && cfg.overlap.is_finite()) {
        return Err(QruError::invalid("spread and overlap must be finite and non-negative"));
    }
    let std = cfg.spread * (1.0 + cfg.overlap);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(cfg.n_per_class * N_CLASSES);
    for (label, mean) in cfg.means.iter().enumerate() {
        for _ in 0..cfg.n_per_class {
            let features = mean
                .iter()
                .map(|&m| {
                    let z: f64 = rng.sample(StandardNormal);
                    m + std * z
                })
                .collect();
            records.push(Record { label, features });
        }
    }
    Ok(Dataset { records, normalization: Normalization::None })
}
