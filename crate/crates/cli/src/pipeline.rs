use std::path::Path;

use qru_core::circuit;
use qru_core::dataio::{self, Dataset};
use qru_core::training::{fit, TrainConfig, TrainReport};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub fn load_data(path: &Path, n_classes: usize) -> CliResult<Dataset> {
    if !path.is_file() {
        return Err(CliError::data(format!("data file {} not found", path.display())));
    }
    let ds = dataio::load_records(path, n_classes)?;
    if ds.is_empty() {
        return Err(CliError::data(format!("{} holds no records", path.display())));
    }
    Ok(ds)
}

/// Seeded split, then min-max fitted on the training part and reused on the test part.
pub fn split_and_normalize(ds: &Dataset, cfg: &RunConfig) -> CliResult<(Dataset, Dataset)> {
    let (train, test) = dataio::split_shuffle(ds, cfg.split_ratio, cfg.seed)?;
    if train.is_empty() || test.is_empty() {
        return Err(CliError::data("split leaves an empty training or test set"));
    }
    let (lo, hi) = cfg.norm_range();
    let train = dataio::normalize(&train, lo, hi)?;
    let test = dataio::apply_normalization(&test, train.normalization())?;
    Ok((train, test))
}

/// One complete run: split, normalize, train. Also returns the normalized test set.
pub fn train_run(ds: &Dataset, cfg: &RunConfig) -> CliResult<(TrainConfig<f64>, TrainReport<f64>, Dataset)> {
    let tc = cfg.train_config()?;
    let (train, test) = split_and_normalize(ds, cfg)?;
    let report = fit(&tc, &train, &test)?;
    Ok((tc, report, test))
}

/// Trains `cfg` and returns the mean squared deviation of test outputs from
/// their class targets, comparable across training losses.
pub fn test_mse(ds: &Dataset, cfg: &RunConfig) -> CliResult<f64> {
    let (tc, report, test) = train_run(ds, cfg)?;
    let mut sum = 0.0;
    for r in test.records() {
        let h = circuit::forward(&tc.spec, &report.final_params, &r.features)?;
        sum += (h - tc.targets[r.label]).powi(2);
    }
    let mse = sum / test.len() as f64;
    if !mse.is_finite() {
        return Err(CliError::Numeric("objective is not finite".into()));
    }
    Ok(mse)
}
