use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::{QruError, Result};

/// `k(x, x′) = σ_f² exp(−‖x − x′‖² / (2ℓ²))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquaredExponential {
    pub length_scale: f64,
    pub signal_var: f64,
}

impl Default for SquaredExponential {
    fn default() -> Self {
        Self { length_scale: 0.5, signal_var: 1.0 }
    }
}

impl SquaredExponential {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.signal_var * (-d2 / (2.0 * self.length_scale * self.length_scale)).exp()
    }
}

/// Zero-mean GP conditioned on observations.
#[derive(Clone, Debug)]
pub struct GpModel {
    pub kernel: SquaredExponential,
    pub jitter: f64,
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
    /// `(K + jitter·I)⁻¹ y`
    alpha: DVector<f64>,
}

impl GpModel {
    /// Prior with no observations.
    pub fn prior(kernel: SquaredExponential, jitter: f64) -> Result<Self> {
        Self::condition(kernel, jitter, Vec::new(), Vec::new())
    }

    pub fn condition(kernel: SquaredExponential, jitter: f64, xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        if !(jitter > 0.0 && jitter.is_finite()) {
            return Err(QruError::invalid("GP jitter must be positive"));
        }
        if !(kernel.length_scale > 0.0 && kernel.signal_var > 0.0) {
            return Err(QruError::invalid("kernel length scale and variance must be positive"));
        }
        if xs.len() != ys.len() {
            return Err(QruError::layout(format!("{} GP inputs but {} observations", xs.len(), ys.len())));
        }
        let n = xs.len();
        if n == 0 {
            return Ok(Self { kernel, jitter, xs, ys, chol: None, alpha: DVector::zeros(0) });
        }
        let k = DMatrix::from_fn(n, n, |i, j| kernel.eval(&xs[i], &xs[j]) + if i == j { jitter } else { 0.0 });
        let chol = Cholesky::new(k)
            .ok_or_else(|| QruError::numeric(format!("GP covariance is singular with jitter {jitter:e}")))?;
        let alpha = chol.solve(&DVector::from_column_slice(&ys));
        Ok(Self { kernel, jitter, xs, ys, chol: Some(chol), alpha })
    }

    pub fn n_observations(&self) -> usize {
        self.ys.len()
    }

    pub fn observations(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.xs, &self.ys)
    }
}

/// Posterior mean and variance (clamped at zero) at `x`.
pub fn gp_posterior(model: &GpModel, x: &[f64]) -> Result<(f64, f64)> {
    let prior_var = model.kernel.eval(x, x);
    let Some(chol) = &model.chol else {
        return Ok((0.0, prior_var));
    };
    if model.xs.iter().any(|xi| xi.len() != x.len()) {
        return Err(QruError::layout("query dimension differs from the observations"));
    }
    let kx = DVector::from_iterator(model.xs.len(), model.xs.iter().map(|xi| model.kernel.eval(xi, x)));
    let mu = kx.dot(&model.alpha);
    let v = chol
        .l_dirty()
        .solve_lower_triangular(&kx)
        .ok_or_else(|| QruError::numeric("triangular solve failed"))?;
    let var = (prior_var - v.dot(&v)).max(0.0);
    if !(mu.is_finite() && var.is_finite()) {
        return Err(QruError::numeric("GP posterior is not finite"));
    }
    Ok((mu, var))
}
