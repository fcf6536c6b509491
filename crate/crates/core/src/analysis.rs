//! Diagnostics on single circuits: hypothesis curves, integer-frequency
//! spectra, expressibility against Haar states and parity.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{self, param_count, CircuitSpec};
use crate::qcore::{state_fidelity, PureState};
use crate::{QruError, Real, Result};

/// Default histogram resolution for expressibility.
pub const EXPR_BINS: usize = 75;
/// Default number of sampled state pairs for expressibility.
pub const EXPR_PAIRS: usize = 5000;
/// Probability assigned to empty histogram bins.
pub const EMPTY_BIN_FLOOR: f64 = 1e-12;

/// `h_θ(x)` on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSample<T> {
    pub xs: Vec<T>,
    pub hs: Vec<T>,
}

/// `h(x) ≈ a₀ + Σ_ω (c_ω cos ωx + s_ω sin ωx)`; index 0 of `cos` holds `a₀`, `sin[0]` is 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumFit<T> {
    pub cos: Vec<T>,
    pub sin: Vec<T>,
    pub residual_rms: T,
}

impl<T: Real> SpectrumFit<T> {
    pub fn max_freq(&self) -> usize {
        self.cos.len() - 1
    }
}

fn grid<T: Real>(interval: (T, T), n_points: usize) -> Result<Vec<T>> {
    let (a, b) = interval;
    if n_points < 2 {
        return Err(QruError::invalid("a curve needs at least two points"));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(QruError::invalid("interval must be finite and increasing"));
    }
    let step = (b - a) / T::lit((n_points - 1) as f64);
    Ok((0..n_points)
        .map(|i| if i == n_points - 1 { b } else { a + step * T::lit(i as f64) })
        .collect())
}

fn single_feature(spec: &CircuitSpec) -> Result<()> {
    if spec.n_features != 1 {
        return Err(QruError::invalid("curve analysis needs a single-feature circuit"));
    }
    Ok(())
}

pub fn hypothesis_curve<T: Real>(
    spec: &CircuitSpec,
    params: &[T],
    interval: (T, T),
    n_points: usize,
) -> Result<CurveSample<T>> {
    single_feature(spec)?;
    let xs = grid(interval, n_points)?;
    let hs = xs
        .iter()
        .map(|&x| circuit::forward(spec, params, &[x]))
        .collect::<Result<_>>()?;
    Ok(CurveSample { xs, hs })
}

/// Least-squares trigonometric fit up to integer frequency `max_freq`.
pub fn spectrum_fit<T: Real>(curve: &CurveSample<T>, max_freq: usize) -> Result<SpectrumFit<T>> {
    let n = curve.xs.len();
    if curve.hs.len() != n {
        return Err(QruError::invalid("curve x and h lengths differ"));
    }
    let cols = 2 * max_freq + 1;
    if n < cols {
        return Err(QruError::invalid(format!(
            "{n} points cannot determine {cols} Fourier coefficients"
        )));
    }
    let xs: Vec<f64> = curve.xs.iter().map(|x| x.as_f64()).collect();
    let a = DMatrix::from_fn(n, cols, |i, j| match j {
        0 => 1.0,
        j if j % 2 == 1 => (((j + 1) / 2) as f64 * xs[i]).cos(),
        j => ((j / 2) as f64 * xs[i]).sin(),
    });
    let y = DVector::from_iterator(n, curve.hs.iter().map(|h| h.as_f64()));
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| QruError::numeric(format!("least-squares solve failed: {e}")))?;
    let resid = &y - &a * &coef;
    let rms = (resid.norm_squared() / n as f64).sqrt();

    let mut cos = vec![T::lit(coef[0])];
    let mut sin = vec![T::zero()];
    for w in 1..=max_freq {
        cos.push(T::lit(coef[2 * w - 1]));
        sin.push(T::lit(coef[2 * w]));
    }
    Ok(SpectrumFit { cos, sin, residual_rms: T::lit(rms) })
}

/// KL divergence between a fidelity histogram and the uniform single-qubit Haar law.
pub fn fidelity_kl<T: Real>(fidelities: &[T], n_bins: usize) -> Result<T> {
    if n_bins < 2 || fidelities.is_empty() {
        return Err(QruError::invalid("need at least two bins and one fidelity"));
    }
    let mut counts = vec![0usize; n_bins];
    for f in fidelities {
        let v = f.as_f64().clamp(0.0, 1.0);
        counts[((v * n_bins as f64) as usize).min(n_bins - 1)] += 1;
    }
    let total = fidelities.len() as f64;
    let q = 1.0 / n_bins as f64;
    let kl: f64 = counts
        .iter()
        .map(|&c| {
            let p = (c as f64 / total).max(EMPTY_BIN_FLOOR);
            p * (p / q).ln()
        })
        .sum();
    Ok(T::lit(kl.max(0.0)))
}

/// Expressibility of an arbitrary state ensemble.
///
/// Pair `i` draws both of its states from its own seeded stream, so results
/// do not depend on how pairs are scheduled across threads.
pub fn ensemble_kl<T, F>(n_pairs: usize, n_bins: usize, seed: u64, sampler: F) -> Result<T>
where
    T: Real,
    F: Fn(&mut ChaCha8Rng) -> Result<PureState<T>> + Sync,
{
    if n_pairs < 100 {
        return Err(QruError::invalid("expressibility needs at least 100 pairs"));
    }
    let fidelities: Vec<T> = (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let a = sampler(&mut rng)?;
            let b = sampler(&mut rng)?;
            Ok(state_fidelity(&a, &b))
        })
        .collect::<Result<_>>()?;
    fidelity_kl(&fidelities, n_bins)
}

/// Expressibility of `spec` with parameters uniform on `[0, 2π)` and every feature at `input`.
pub fn expressibility_kl_at<T: Real>(spec: &CircuitSpec, input: T, n_pairs: usize, n_bins: usize, seed: u64) -> Result<T> {
    let x = vec![input; spec.n_features];
    let n = param_count(spec);
    let two_pi = 2.0 * std::f64::consts::PI;
    ensemble_kl(n_pairs, n_bins, seed, |rng| {
        let theta: Vec<T> = (0..n).map(|_| T::lit(rng.random_range(0.0..two_pi))).collect();
        circuit::output_state(spec, &theta, &x)
    })
}

/// Expressibility with the data input fixed at 1 for every feature.
pub fn expressibility_kl<T: Real>(spec: &CircuitSpec, n_pairs: usize, n_bins: usize, seed: u64) -> Result<T> {
    expressibility_kl_at(spec, T::one(), n_pairs, n_bins, seed)
}

/// `max |h(x) − h(−x)|` over a grid on a symmetric interval.
pub fn evenness_gap<T: Real>(spec: &CircuitSpec, params: &[T], interval: (T, T), n_points: usize) -> Result<T> {
    single_feature(spec)?;
    let (a, b) = interval;
    if a != -b {
        return Err(QruError::invalid("evenness needs an interval symmetric about zero"));
    }
    let xs = grid(interval, n_points)?;
    let mut gap = T::zero();
    for x in xs {
        let d = circuit::forward(spec, params, &[x])? - circuit::forward(spec, params, &[-x])?;
        gap = gap.max(d.abs());
    }
    Ok(gap)
}
