use std::fmt;
use std::str::FromStr;

use crate::{QruError, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sgd,
    RmsProp,
    Adam,
    Adamax,
    Nadam,
    Adagrad,
    Adadelta,
    AdamW,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 8] = [
        OptimizerKind::Sgd,
        OptimizerKind::RmsProp,
        OptimizerKind::Adam,
        OptimizerKind::Adamax,
        OptimizerKind::Nadam,
        OptimizerKind::Adagrad,
        OptimizerKind::Adadelta,
        OptimizerKind::AdamW,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::RmsProp => "rmsprop",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adamax => "adamax",
            OptimizerKind::Nadam => "nadam",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Adadelta => "adadelta",
            OptimizerKind::AdamW => "adamw",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = QruError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| QruError::invalid(format!("unknown optimizer '{s}'")))
    }
}

/// Rule constants; every field is overridable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerHyper<T> {
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    /// RMSProp squared-gradient decay.
    pub rms_alpha: T,
    /// AdamW decoupled weight decay.
    pub weight_decay: T,
    /// Adadelta decay.
    pub rho: T,
    /// Bias-correct the Adam-family moments.
    pub bias_correction: bool,
}

impl<T: Real> Default for OptimizerHyper<T> {
    fn default() -> Self {
        Self {
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            rms_alpha: T::lit(0.9),
            weight_decay: T::lit(0.01),
            rho: T::lit(0.9),
            bias_correction: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimizer<T> {
    pub kind: OptimizerKind,
    pub hyper: OptimizerHyper<T>,
}

impl<T: Real> Optimizer<T> {
    pub fn new(kind: OptimizerKind) -> Self {
        Self { kind, hyper: OptimizerHyper::default() }
    }

    pub fn with_hyper(kind: OptimizerKind, hyper: OptimizerHyper<T>) -> Result<Self> {
        let h = &hyper;
        let unit = |v: T| v > T::zero() && v < T::one();
        if !(unit(h.beta1) && unit(h.beta2) && unit(h.rms_alpha) && unit(h.rho)) {
            return Err(QruError::invalid("decay rates must lie in (0, 1)"));
        }
        if !(h.eps > T::zero() && h.eps.is_finite()) {
            return Err(QruError::invalid("epsilon must be positive"));
        }
        if !(h.weight_decay >= T::zero() && h.weight_decay.is_finite()) {
            return Err(QruError::invalid("weight decay must be non-negative"));
        }
        Ok(Self { kind, hyper })
    }

    pub fn init_state(&self, n_params: usize) -> OptimizerState<T> {
        OptimizerState {
            kind: self.kind,
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
            u: vec![T::zero(); n_params],
            t: 0,
        }
    }
}

/// Per-parameter accumulators.
///
/// `m` is the first moment, `v` the second moment (or Adagrad's running sum,
/// Adamax's infinity norm, Adadelta's averaged g²) and `u` Adadelta's averaged
/// squared update.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<T> {
    pub kind: OptimizerKind,
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub u: Vec<T>,
    pub t: u64,
}

/// One update of `params` in place.
///
/// Adadelta ignores `lr`.
pub fn optimizer_step<T: Real>(
    opt: &Optimizer<T>,
    state: &mut OptimizerState<T>,
    params: &mut [T],
    grads: &[T],
    lr: T,
) -> Result<()> {
    if state.kind != opt.kind {
        return Err(QruError::invalid(format!(
            "optimizer state belongs to {} not {}",
            state.kind, opt.kind
        )));
    }
    let n = params.len();
    if grads.len() != n || state.m.len() != n {
        return Err(QruError::layout(format!(
            "optimizer shapes disagree: {} params, {} grads, {} state",
            n,
            grads.len(),
            state.m.len()
        )));
    }
    let h = &opt.hyper;
    let one = T::one();
    state.t += 1;
    let t = state.t as i32;
    let (c1, c2) = if h.bias_correction {
        (one - h.beta1.powi(t), one - h.beta2.powi(t))
    } else {
        (one, one)
    };

    match opt.kind {
        OptimizerKind::Sgd => {
            for (p, &g) in params.iter_mut().zip(grads) {
                *p -= lr * g;
            }
        }
        OptimizerKind::RmsProp => {
            let a = h.rms_alpha;
            for i in 0..n {
                let g = grads[i];
                state.v[i] = a * state.v[i] + (one - a) * g * g;
                params[i] -= lr * g / (state.v[i] + h.eps).sqrt();
            }
        }
        OptimizerKind::Adam | OptimizerKind::AdamW => {
            if opt.kind == OptimizerKind::AdamW {
                for p in params.iter_mut() {
                    *p -= lr * h.weight_decay * *p;
                }
            }
            for i in 0..n {
                let g = grads[i];
                state.m[i] = h.beta1 * state.m[i] + (one - h.beta1) * g;
                state.v[i] = h.beta2 * state.v[i] + (one - h.beta2) * g * g;
                let m_hat = state.m[i] / c1;
                let v_hat = state.v[i] / c2;
                params[i] -= lr * m_hat / (v_hat.sqrt() + h.eps);
            }
        }
        OptimizerKind::Adamax => {
            for i in 0..n {
                let g = grads[i];
                state.m[i] = h.beta1 * state.m[i] + (one - h.beta1) * g;
                state.v[i] = (h.beta2 * state.v[i]).max(g.abs());
                params[i] -= lr / c1 * state.m[i] / (state.v[i] + h.eps);
            }
        }
        OptimizerKind::Nadam => {
            // Nesterov look-ahead: mix the corrected momentum with the current gradient.
            let c1_next = if h.bias_correction { one - h.beta1.powi(t + 1) } else { one };
            for i in 0..n {
                let g = grads[i];
                state.m[i] = h.beta1 * state.m[i] + (one - h.beta1) * g;
                state.v[i] = h.beta2 * state.v[i] + (one - h.beta2) * g * g;
                let m_bar = h.beta1 * state.m[i] / c1_next + (one - h.beta1) * g / c1;
                let v_hat = state.v[i] / c2;
                params[i] -= lr * m_bar / (v_hat.sqrt() + h.eps);
            }
        }
        OptimizerKind::Adagrad => {
            for i in 0..n {
                let g = grads[i];
                state.v[i] += g * g;
                params[i] -= lr * g / (state.v[i].sqrt() + h.eps);
            }
        }
        OptimizerKind::Adadelta => {
            let r = h.rho;
            for i in 0..n {
                let g = grads[i];
                state.v[i] = r * state.v[i] + (one - r) * g * g;
                let delta = -((state.u[i] + h.eps).sqrt() / (state.v[i] + h.eps).sqrt()) * g;
                state.u[i] = r * state.u[i] + (one - r) * delta * delta;
                params[i] += delta;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-8;

    fn run(kind: OptimizerKind, theta: [f64; 2], grads: [[f64; 2]; 2], lr: f64) -> [f64; 2] {
        let opt = Optimizer::new(kind);
        let mut st = opt.init_state(2);
        let mut p = theta.to_vec();
        for g in grads {
            optimizer_step(&opt, &mut st, &mut p, &g, lr).unwrap();
        }
        [p[0], p[1]]
    }

    #[test]
    fn sgd_example() {
        let opt = Optimizer::new(OptimizerKind::Sgd);
        let mut st = opt.init_state(1);
        let mut p = vec![1.0f64];
        optimizer_step(&opt, &mut st, &mut p, &[0.5], 0.1).unwrap();
        assert!((p[0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_sign_step() {
        let opt = Optimizer::new(OptimizerKind::Adam);
        let mut st = opt.init_state(1);
        let mut p = vec![0.0];
        optimizer_step(&opt, &mut st, &mut p, &[2.0], 0.001).unwrap();
        assert!((p[0] - (-0.001 * 2.0 / (2.0 + EPS))).abs() < 1e-15);
    }

    #[test]
    fn adagrad_accumulates() {
        let p = run(OptimizerKind::Adagrad, [0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]], 0.5);
        let expected = -0.5 / (1.0 + EPS) - 0.5 / (2f64.sqrt() + EPS);
        assert!((p[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn adadelta_ignores_learning_rate() {
        let g = [[0.3, -1.0], [0.2, 0.5]];
        assert_eq!(run(OptimizerKind::Adadelta, [1.0, 2.0], g, 0.1), run(OptimizerKind::Adadelta, [1.0, 2.0], g, 7.0));
    }

    #[test]
    fn uncorrected_adam_follows_plain_moments() {
        let hyper = OptimizerHyper { bias_correction: false, ..Default::default() };
        let opt = Optimizer::with_hyper(OptimizerKind::Adam, hyper).unwrap();
        let mut st = opt.init_state(1);
        let mut p = vec![0.0];
        optimizer_step(&opt, &mut st, &mut p, &[2.0], 0.001).unwrap();
        let (m, v) = (0.1 * 2.0, 0.001 * 4.0);
        assert!((p[0] + 0.001 * m / (f64::sqrt(v) + EPS)).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let opt = Optimizer::<f64>::new(OptimizerKind::Adam);
        let mut st = opt.init_state(2);
        let mut p = vec![0.0; 3];
        assert!(matches!(optimizer_step(&opt, &mut st, &mut p, &[0.0; 3], 0.1), Err(QruError::Layout(_))));
        let mut wrong = Optimizer::<f64>::new(OptimizerKind::Sgd).init_state(3);
        assert!(optimizer_step(&opt, &mut wrong, &mut p, &[0.0; 3], 0.1).is_err());
        let bad = OptimizerHyper { beta1: 1.0, ..Default::default() };
        assert!(Optimizer::<f64>::with_hyper(OptimizerKind::Adam, bad).is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in OptimizerKind::ALL {
            assert_eq!(k.name().parse::<OptimizerKind>().unwrap(), k);
        }
        assert_eq!("RMSprop".parse::<OptimizerKind>().unwrap(), OptimizerKind::RmsProp);
        assert_eq!("NAdam".parse::<OptimizerKind>().unwrap(), OptimizerKind::Nadam);
        assert!("lbfgs".parse::<OptimizerKind>().is_err());
    }
}
