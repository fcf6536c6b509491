use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{annotate_best, check_objective, HpoConfig, HpoSpace, SearchHistory, Trial};
use crate::{QruError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HyperbandOptions {
    /// Largest per-config budget `R`, in epochs.
    pub max_budget: usize,
    pub eta: usize,
    pub seed: u64,
}

impl Default for HyperbandOptions {
    fn default() -> Self {
        Self { max_budget: 30, eta: 3, seed: 0 }
    }
}

/// Opening size and budget of one bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BracketPlan {
    pub s: usize,
    pub n: usize,
    pub r: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rung {
    pub n_configs: usize,
    pub budget: usize,
    pub kept: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bracket {
    pub plan: BracketPlan,
    pub rungs: Vec<Rung>,
}

/// `s_max = ⌊log_η R⌋`; bracket `s` opens with `n = ⌈(s_max+1)/(s+1)·ηˢ⌉`
/// configurations at budget `r = ⌊R·η⁻ˢ⌋` (at least 1).
pub fn bracket_schedule(max_budget: usize, eta: usize) -> Result<Vec<BracketPlan>> {
    if max_budget == 0 || eta < 2 {
        return Err(QruError::invalid("Hyperband needs R >= 1 and eta >= 2"));
    }
    let mut s_max = 0;
    while eta.pow(s_max as u32 + 1) <= max_budget {
        s_max += 1;
    }
    Ok((0..=s_max)
        .rev()
        .map(|s| {
            let eta_s = eta.pow(s as u32);
            BracketPlan {
                s,
                n: ((s_max + 1) * eta_s).div_ceil(s + 1),
                r: (max_budget / eta_s).max(1),
            }
        })
        .collect())
}

/// Hyperband over random grid configurations.
///
/// Within each rung the surviving configurations are evaluated (concurrently,
/// recorded in rank order) and the best `⌊n_i/η⌋` by ascending loss advance,
/// ties going to the earlier trial.
pub fn hyperband_search<F>(space: &HpoSpace, budgeted_objective: F, opts: &HyperbandOptions) -> Result<SearchHistory>
where
    F: Fn(&HpoConfig, usize) -> Result<f64> + Sync,
{
    space.validate()?;
    let plans = bracket_schedule(opts.max_budget, opts.eta)?;
    let grid = space.grid_size();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trials: Vec<Trial> = Vec::new();
    let mut brackets = Vec::with_capacity(plans.len());

    for plan in plans {
        let picks: Vec<usize> = if plan.n <= grid {
            index::sample(&mut rng, grid, plan.n).into_vec()
        } else {
            (0..plan.n).map(|_| rng.random_range(0..grid)).collect()
        };
        let mut alive: Vec<HpoConfig> = picks.into_iter().map(|g| space.config_at(g)).collect();
        let mut rungs = Vec::new();
        let eta_s = opts.eta.pow(plan.s as u32);
        for i in 0..=plan.s {
            if alive.is_empty() {
                break;
            }
            let budget = (opts.max_budget * opts.eta.pow(i as u32) / eta_s).clamp(1, opts.max_budget);
            let losses: Vec<f64> = alive
                .par_iter()
                .map(|c| budgeted_objective(c, budget).and_then(|v| check_objective(v, c)))
                .collect::<Result<_>>()?;
            let first = trials.len();
            for (c, &v) in alive.iter().zip(&losses) {
                trials.push(Trial {
                    index: trials.len(),
                    config: *c,
                    objective: v,
                    budget,
                    best_so_far: v,
                    bracket: Some(plan.s),
                    rung: Some(i),
                });
            }
            let kept = alive.len() / opts.eta;
            rungs.push(Rung { n_configs: alive.len(), budget, kept });
            let mut ranked: Vec<usize> = (0..alive.len()).collect();
            ranked.sort_by(|&a, &b| losses[a].total_cmp(&losses[b]).then((first + a).cmp(&(first + b))));
            alive = ranked[..kept].iter().map(|&k| alive[k]).collect();
        }
        brackets.push(Bracket { plan, rungs });
    }

    annotate_best(&mut trials);
    Ok(SearchHistory { trials, capped: false, brackets })
}
