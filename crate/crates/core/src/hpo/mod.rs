//! Global hyperparameter search over a discrete grid.
//!
//! Two strategies share the same space and trial record: Gaussian-process
//! Bayesian search with a confidence-bound acquisition ([`bayes_search`]) and
//! Hyperband successive halving ([`hyperband_search`]).

mod bayes;
mod gp;
mod hyperband;

use std::fmt;
use std::str::FromStr;

pub use bayes::{acquisition, bayes_search, BayesOptions};
pub use gp::{gp_posterior, GpModel, SquaredExponential};
pub use hyperband::{bracket_schedule, hyperband_search, Bracket, BracketPlan, HyperbandOptions, Rung};

use crate::training::{LossKind, OptimizerKind};
use crate::{QruError, Result};

/// Loss family as a search dimension; Huber uses `delta = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossChoice {
    L1,
    L2,
    Huber,
}

impl LossChoice {
    pub const ALL: [LossChoice; 3] = [LossChoice::L1, LossChoice::L2, LossChoice::Huber];

    pub fn name(self) -> &'static str {
        match self {
            LossChoice::L1 => "l1",
            LossChoice::L2 => "l2",
            LossChoice::Huber => "huber",
        }
    }

    pub fn to_loss(self) -> LossKind<f64> {
        match self {
            LossChoice::L1 => LossKind::L1,
            LossChoice::L2 => LossKind::L2,
            LossChoice::Huber => LossKind::Huber { delta: 1.0 },
        }
    }
}

impl fmt::Display for LossChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossChoice {
    type Err = QruError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        LossChoice::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| QruError::invalid(format!("unknown loss '{s}'")))
    }
}

/// Feature normalization interval `[lo, hi]`.
pub type NormRange = (f64, f64);

#[derive(Clone, Debug, PartialEq)]
pub struct HpoSpace {
    pub depths: Vec<usize>,
    pub lrs: Vec<f64>,
    pub losses: Vec<LossChoice>,
    pub optimizers: Vec<OptimizerKind>,
    pub normalizations: Option<Vec<NormRange>>,
}

/// One point of the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HpoConfig {
    pub depth: usize,
    pub lr: f64,
    pub loss: LossChoice,
    pub optimizer: OptimizerKind,
    pub normalization: Option<NormRange>,
}

impl HpoSpace {
    /// depth 1..=10, seven decades of learning rate, three losses, eight optimizers.
    pub fn standard() -> Self {
        Self {
            depths: (1..=10).collect(),
            lrs: vec![0.5, 0.05, 0.005, 0.0005, 0.00005, 0.000005, 0.0000005],
            losses: LossChoice::ALL.to_vec(),
            optimizers: OptimizerKind::ALL.to_vec(),
            normalizations: None,
        }
    }

    /// Adds the `[−π, π]` / `[0, 2π]` normalization dimension.
    pub fn with_normalization(mut self) -> Self {
        use std::f64::consts::PI;
        self.normalizations = Some(vec![(-PI, PI), (0.0, 2.0 * PI)]);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let norm_empty = self.normalizations.as_ref().is_some_and(Vec::is_empty);
        if self.depths.is_empty() || self.lrs.is_empty() || self.losses.is_empty() || self.optimizers.is_empty() || norm_empty {
            return Err(QruError::invalid("every search dimension needs at least one choice"));
        }
        if self.depths.contains(&0) {
            return Err(QruError::invalid("depth choices must be positive"));
        }
        if !self.lrs.iter().all(|&lr| lr > 0.0 && lr.is_finite()) {
            return Err(QruError::invalid("learning-rate choices must be positive"));
        }
        Ok(())
    }

    fn dims(&self) -> [usize; 5] {
        [
            self.depths.len(),
            self.lrs.len(),
            self.losses.len(),
            self.optimizers.len(),
            self.normalizations.as_ref().map_or(1, Vec::len),
        ]
    }

    pub fn grid_size(&self) -> usize {
        self.dims().iter().product()
    }

    /// Grid point at `index`; depth varies slowest, normalization fastest.
    pub fn config_at(&self, index: usize) -> HpoConfig {
        let dims = self.dims();
        let mut rem = index;
        let mut idx = [0usize; 5];
        for d in (0..5).rev() {
            idx[d] = rem % dims[d];
            rem /= dims[d];
        }
        HpoConfig {
            depth: self.depths[idx[0]],
            lr: self.lrs[idx[1]],
            loss: self.losses[idx[2]],
            optimizer: self.optimizers[idx[3]],
            normalization: self.normalizations.as_ref().map(|n| n[idx[4]]),
        }
    }

    fn positions(&self, c: &HpoConfig) -> Result<[usize; 5]> {
        let missing = |what: &str| QruError::invalid(format!("{what} is not in the search space"));
        let depth = self.depths.iter().position(|&d| d == c.depth).ok_or_else(|| missing("depth"))?;
        let lr = self.lrs.iter().position(|&l| l == c.lr).ok_or_else(|| missing("learning rate"))?;
        let loss = self.losses.iter().position(|&l| l == c.loss).ok_or_else(|| missing("loss"))?;
        let opt = self.optimizers.iter().position(|&o| o == c.optimizer).ok_or_else(|| missing("optimizer"))?;
        let norm = match (&self.normalizations, c.normalization) {
            (None, None) => 0,
            (Some(ns), Some(r)) => ns.iter().position(|&n| n == r).ok_or_else(|| missing("normalization"))?,
            _ => return Err(missing("normalization")),
        };
        Ok([depth, lr, loss, opt, norm])
    }

    pub fn index_of(&self, c: &HpoConfig) -> Result<usize> {
        let pos = self.positions(c)?;
        Ok(pos.iter().zip(self.dims()).fold(0, |acc, (&p, d)| acc * d + p))
    }
}

/// Maps a configuration into the unit cube used by the GP.
///
/// Depth scales linearly between its extreme choices, learning rate on a
/// log₁₀ scale from the largest (0) to the smallest (1), categorical choices
/// by ordinal position.
pub fn encode_config(space: &HpoSpace, config: &HpoConfig) -> Result<Vec<f64>> {
    let pos = space.positions(config)?;
    let scale = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let ordinal = |p: usize, n: usize| if n > 1 { p as f64 / (n - 1) as f64 } else { 0.0 };

    let dmin = *space.depths.iter().min().expect("validated") as f64;
    let dmax = *space.depths.iter().max().expect("validated") as f64;
    let lmax = space.lrs.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10();
    let lmin = space.lrs.iter().copied().fold(f64::INFINITY, f64::min).log10();

    let mut v = vec![
        scale(config.depth as f64, dmin, dmax),
        scale(lmax - config.lr.log10(), 0.0, lmax - lmin),
        ordinal(pos[2], space.losses.len()),
        ordinal(pos[3], space.optimizers.len()),
    ];
    if let Some(ns) = &space.normalizations {
        v.push(ordinal(pos[4], ns.len()));
    }
    Ok(v)
}

/// One evaluated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub index: usize,
    pub config: HpoConfig,
    pub objective: f64,
    /// Training epochs used.
    pub budget: usize,
    pub best_so_far: f64,
    /// Hyperband bracket `s` and rung `i`, when applicable.
    pub bracket: Option<usize>,
    pub rung: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchHistory {
    pub trials: Vec<Trial>,
    /// Requested more calls than grid points; the run was cut to the grid size.
    pub capped: bool,
    pub brackets: Vec<Bracket>,
}

impl SearchHistory {
    /// Lowest objective; ties go to the earliest trial.
    pub fn best(&self) -> Option<&Trial> {
        self.trials.iter().fold(None, |best: Option<&Trial>, t| match best {
            Some(b) if b.objective <= t.objective => Some(b),
            _ => Some(t),
        })
    }
}

fn check_objective(v: f64, config: &HpoConfig) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QruError::numeric(format!("objective is not finite for {config:?}")))
    }
}

fn annotate_best(trials: &mut [Trial]) {
    let mut best = f64::INFINITY;
    for t in trials {
        best = best.min(t.objective);
        t.best_so_far = best;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(HpoSpace::standard().grid_size(), 1680);
        assert_eq!(HpoSpace::standard().with_normalization().grid_size(), 3360);
    }

    #[test]
    fn encoding_endpoints() {
        let space = HpoSpace::standard();
        let mut c = space.config_at(0);
        assert_eq!(c.depth, 1);
        assert_eq!(encode_config(&space, &c).unwrap()[0], 0.0);
        c.depth = 10;
        assert_eq!(encode_config(&space, &c).unwrap()[0], 1.0);
        c.lr = 0.5;
        assert_eq!(encode_config(&space, &c).unwrap()[1], 0.0);
        c.lr = 5e-7;
        assert!((encode_config(&space, &c).unwrap()[1] - 1.0).abs() < 1e-12);
        c.lr = 0.3;
        assert!(encode_config(&space, &c).is_err());
        c.lr = 0.5;
        c.normalization = Some((0.0, 1.0));
        assert!(encode_config(&space, &c).is_err());
    }

    #[test]
    fn encoding_is_injective_over_grid() {
        let space = HpoSpace::standard().with_normalization();
        let mut seen: Vec<Vec<u64>> = (0..space.grid_size())
            .map(|i| {
                let v = encode_config(&space, &space.config_at(i)).unwrap();
                v.iter().map(|x| x.to_bits()).collect()
            })
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), space.grid_size());
    }

    #[test]
    fn index_round_trip() {
        let space = HpoSpace::standard().with_normalization();
        for i in (0..space.grid_size()).step_by(7) {
            assert_eq!(space.index_of(&space.config_at(i)).unwrap(), i);
        }
    }

    #[test]
    fn empty_dimension_rejected() {
        let mut s = HpoSpace::standard();
        s.losses.clear();
        assert!(s.validate().is_err());
    }
}
