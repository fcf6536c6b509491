use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::gp::{gp_posterior, GpModel, SquaredExponential};
use super::{annotate_best, check_objective, encode_config, HpoConfig, HpoSpace, SearchHistory, Trial};
use crate::{QruError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BayesOptions {
    pub n_calls: usize,
    pub kappa: f64,
    pub seed: u64,
    pub n_initial: usize,
    /// Epochs each objective evaluation trains for; recorded on every trial.
    pub budget: usize,
    pub kernel: SquaredExponential,
    pub jitter: f64,
}

impl Default for BayesOptions {
    fn default() -> Self {
        Self {
            n_calls: 50,
            kappa: 4.0,
            seed: 0,
            n_initial: 10,
            budget: 30,
            kernel: SquaredExponential::default(),
            jitter: 1e-8,
        }
    }
}

/// Confidence-bound utility `−μ + κσ` for a minimized objective.
pub fn acquisition(mu: f64, var: f64, kappa: f64) -> f64 {
    -mu + kappa * var.max(0.0).sqrt()
}

/// GP-guided search over the full grid.
///
/// `n_initial` distinct random grid points are evaluated first (concurrently,
/// recorded in sample order); each later call refits the GP on every trial so
/// far and evaluates the unevaluated grid point of highest acquisition,
/// breaking ties toward the lowest grid index.
pub fn bayes_search<F>(space: &HpoSpace, objective: F, opts: &BayesOptions) -> Result<SearchHistory>
where
    F: Fn(&HpoConfig) -> Result<f64> + Sync,
{
    space.validate()?;
    if opts.n_initial == 0 || opts.n_initial >= opts.n_calls {
        return Err(QruError::invalid("need 0 < n_initial < n_calls"));
    }
    if opts.budget == 0 {
        return Err(QruError::invalid("budget must be at least one epoch"));
    }
    let grid = space.grid_size();
    let capped = opts.n_calls > grid;
    let n_calls = opts.n_calls.min(grid);
    let n_initial = opts.n_initial.min(n_calls);

    let encoded: Vec<Vec<f64>> = (0..grid)
        .map(|i| encode_config(space, &space.config_at(i)))
        .collect::<Result<_>>()?;
    let mut evaluated = vec![false; grid];
    let mut xs = Vec::with_capacity(n_calls);
    let mut ys = Vec::with_capacity(n_calls);
    let mut trials = Vec::with_capacity(n_calls);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let initial: Vec<usize> = index::sample(&mut rng, grid, n_initial).into_vec();
    let values: Vec<f64> = initial
        .par_iter()
        .map(|&g| {
            let c = space.config_at(g);
            objective(&c).and_then(|v| check_objective(v, &c))
        })
        .collect::<Result<_>>()?;
    for (&g, v) in initial.iter().zip(values) {
        record(space, g, v, opts.budget, &mut trials);
        evaluated[g] = true;
        xs.push(encoded[g].clone());
        ys.push(v);
    }

    while trials.len() < n_calls {
        let model = fit_model(opts, xs.clone(), ys.clone())?;
        let mut best: Option<(usize, f64)> = None;
        for g in (0..grid).filter(|&g| !evaluated[g]) {
            let (mu, var) = gp_posterior(&model, &encoded[g])?;
            let u = acquisition(mu, var, opts.kappa);
            if best.is_none_or(|(_, b)| u > b) {
                best = Some((g, u));
            }
        }
        let (g, _) = best.expect("grid not exhausted");
        let c = space.config_at(g);
        let v = check_objective(objective(&c)?, &c)?;
        record(space, g, v, opts.budget, &mut trials);
        evaluated[g] = true;
        xs.push(encoded[g].clone());
        ys.push(v);
    }

    annotate_best(&mut trials);
    Ok(SearchHistory { trials, capped, brackets: Vec::new() })
}

/// Conditions the GP, raising the jitter tenfold (up to 1e-4) if the covariance is not positive definite.
fn fit_model(opts: &BayesOptions, xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<GpModel> {
    let mut jitter = opts.jitter;
    loop {
        match GpModel::condition(opts.kernel, jitter, xs.clone(), ys.clone()) {
            Ok(m) => return Ok(m),
            Err(QruError::Numeric(_)) if jitter < 1e-4 => jitter *= 10.0,
            Err(e) => return Err(e),
        }
    }
}

fn record(space: &HpoSpace, grid_index: usize, objective: f64, budget: usize, trials: &mut Vec<Trial>) {
    trials.push(Trial {
        index: trials.len(),
        config: space.config_at(grid_index),
        objective,
        budget,
        best_so_far: objective,
        bracket: None,
        rung: None,
    });
}
