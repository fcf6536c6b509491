use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::loss::{loss_and_grad, LossKind};
use super::optimizer::{optimizer_step, Optimizer, OptimizerKind};
use super::schedule::{lr_at_epoch, LrSchedule};
use crate::circuit::{self, default_targets, predict_class, CircuitSpec};
use crate::dataio::Dataset;
use crate::{QruError, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitKind<T> {
    Constant(T),
    Gaussian { mean: T, std: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig<T> {
    pub spec: CircuitSpec,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: T,
    pub optimizer: Optimizer<T>,
    pub loss: LossKind<T>,
    pub seed: u64,
    pub init: InitKind<T>,
    pub schedule: LrSchedule,
    /// Circuit output each class label is trained towards.
    pub targets: Vec<T>,
}

impl<T: Real> TrainConfig<T> {
    /// Adam, L2, lr 5e-4, batch 1, 30 epochs, θ = 0.5, three classes.
    pub fn baseline(spec: CircuitSpec) -> Self {
        Self {
            spec,
            epochs: 30,
            batch_size: 1,
            lr: T::lit(5e-4),
            optimizer: Optimizer::new(OptimizerKind::Adam),
            loss: LossKind::L2,
            seed: 0,
            init: InitKind::Constant(T::lit(0.5)),
            schedule: LrSchedule::Constant,
            targets: default_targets(3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(QruError::invalid("epochs and batch size must be at least 1"));
        }
        if !(self.lr.is_finite() && self.lr >= T::zero()) {
            return Err(QruError::invalid("learning rate must be finite and non-negative"));
        }
        if self.targets.is_empty() {
            return Err(QruError::invalid("class targets must not be empty"));
        }
        if let InitKind::Gaussian { std, .. } = self.init {
            if !(std >= T::zero() && std.is_finite()) {
                return Err(QruError::invalid("init std must be non-negative"));
            }
        }
        Ok(())
    }

    fn initial_params<R: Rng>(&self, rng: &mut R) -> Vec<T> {
        let n = self.spec.param_count();
        match self.init {
            InitKind::Constant(v) => vec![v; n],
            InitKind::Gaussian { mean, std } => (0..n)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    mean + std * T::lit(z)
                })
                .collect(),
        }
    }
}

/// Per-epoch curves plus final parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainReport<T> {
    pub train_loss: Vec<T>,
    pub train_acc: Vec<T>,
    pub test_loss: Vec<T>,
    pub test_acc: Vec<T>,
    pub initial_params: Vec<T>,
    pub final_params: Vec<T>,
    pub trainability: T,
    pub wall_time: f64,
}

impl<T: Real> TrainReport<T> {
    pub fn final_train_loss(&self) -> T {
        *self.train_loss.last().expect("at least one epoch")
    }

    pub fn final_test_loss(&self) -> T {
        *self.test_loss.last().expect("at least one epoch")
    }

    pub fn final_train_acc(&self) -> T {
        *self.train_acc.last().expect("at least one epoch")
    }

    pub fn final_test_acc(&self) -> T {
        *self.test_acc.last().expect("at least one epoch")
    }
}

struct Prepared<T> {
    xs: Vec<Vec<T>>,
    targets: Vec<T>,
    labels: Vec<usize>,
}

fn prepare<T: Real>(cfg: &TrainConfig<T>, ds: &Dataset, what: &str) -> Result<Prepared<T>> {
    if ds.is_empty() {
        return Err(QruError::invalid(format!("{what} set is empty")));
    }
    let mut xs = Vec::with_capacity(ds.len());
    let mut targets = Vec::with_capacity(ds.len());
    let mut labels = Vec::with_capacity(ds.len());
    for (i, r) in ds.records().iter().enumerate() {
        if r.features.len() != cfg.spec.n_features {
            return Err(QruError::layout(format!(
                "{what} record {i} has {} features, circuit expects {}",
                r.features.len(),
                cfg.spec.n_features
            )));
        }
        let target = *cfg.targets.get(r.label).ok_or_else(|| {
            QruError::invalid(format!("{what} record {i}: label {} has no target", r.label))
        })?;
        xs.push(r.features.iter().map(|&v| T::lit(v)).collect());
        targets.push(target);
        labels.push(r.label);
    }
    Ok(Prepared { xs, targets, labels })
}

/// Mean loss and accuracy over a prepared set.
fn metrics<T: Real>(cfg: &TrainConfig<T>, params: &[T], set: &Prepared<T>) -> Result<(T, T)> {
    let mut loss = T::zero();
    let mut hits = 0usize;
    for ((x, &y), &label) in set.xs.iter().zip(&set.targets).zip(&set.labels) {
        let h = circuit::forward(&cfg.spec, params, x)?;
        loss += loss_and_grad(cfg.loss, y, h).0;
        if predict_class(h, &cfg.targets)? == label {
            hits += 1;
        }
    }
    let n = T::lit(set.xs.len() as f64);
    Ok((loss / n, T::lit(hits as f64) / n))
}

/// Mini-batch training.
///
/// Each epoch reshuffles the training set with the seeded stream, averages
/// per-sample gradients over consecutive batches (the last one may be short)
/// and takes one optimizer step per batch. Metrics are measured with the
/// parameters reached at the end of the epoch.
pub fn fit<T: Real>(config: &TrainConfig<T>, train_set: &Dataset, test_set: &Dataset) -> Result<TrainReport<T>> {
    config.validate()?;
    let train = prepare(config, train_set, "training")?;
    let test = prepare(config, test_set, "test")?;
    let start = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = config.initial_params(&mut rng);
    let initial_params = params.clone();
    let mut opt_state = config.optimizer.init_state(params.len());
    let mut order: Vec<usize> = (0..train.xs.len()).collect();
    let mut grad = vec![T::zero(); params.len()];

    let e = config.epochs;
    let mut report = TrainReport {
        train_loss: Vec::with_capacity(e),
        train_acc: Vec::with_capacity(e),
        test_loss: Vec::with_capacity(e),
        test_acc: Vec::with_capacity(e),
        initial_params,
        final_params: Vec::new(),
        trainability: T::zero(),
        wall_time: 0.0,
    };

    for epoch in 0..e {
        order.shuffle(&mut rng);
        let lr = lr_at_epoch(config.schedule, config.lr, epoch, e);
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = T::zero());
            for &i in batch {
                let (h, g) = circuit::forward_and_gradient(&config.spec, &params, &train.xs[i])?;
                let (_, dl) = loss_and_grad(config.loss, train.targets[i], h);
                for (acc, gk) in grad.iter_mut().zip(g) {
                    *acc += dl * gk;
                }
            }
            let inv = T::one() / T::lit(batch.len() as f64);
            grad.iter_mut().for_each(|g| *g *= inv);
            optimizer_step(&config.optimizer, &mut opt_state, &mut params, &grad, lr)?;
        }
        if !params.iter().all(|p| p.is_finite()) {
            return Err(QruError::numeric(format!("parameters diverged in epoch {epoch}")));
        }
        let (tr_loss, tr_acc) = metrics(config, &params, &train)?;
        let (te_loss, te_acc) = metrics(config, &params, &test)?;
        report.train_loss.push(tr_loss);
        report.train_acc.push(tr_acc);
        report.test_loss.push(te_loss);
        report.test_acc.push(te_acc);
    }

    report.trainability = if e >= 2 { trainability(&report.train_loss)? } else { T::zero() };
    report.final_params = params;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Trapezoidal area under a loss curve sampled at unit-spaced epochs.
///
/// Interior points weigh 1 and endpoints 1/2; the sum is compensated
/// (Neumaier) so a linear curve from 1 to 0 lands exactly on `E/2`.
pub fn trainability<T: Real>(loss_curve: &[T]) -> Result<T> {
    let n = loss_curve.len();
    if n < 2 {
        return Err(QruError::invalid("trainability needs at least two loss values"));
    }
    let ends = (loss_curve[0] + loss_curve[n - 1]) * T::lit(0.5);
    let (mut sum, mut comp) = (T::zero(), T::zero());
    for &x in loss_curve[1..n - 1].iter().chain(std::iter::once(&ends)) {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    Ok(sum + comp)
}
