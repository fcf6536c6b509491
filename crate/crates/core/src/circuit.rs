//! The re-uploading circuit family.
//!
//! One layer encodes every feature in ascending order; each feature gets its
//! own block `outer(θ) → middle(encoded angle) → closing(θ)` acting on `|0⟩`.
//! Block parameter layouts by parameters-per-input (ppi):
//!
//! | ppi | outer | middle angle              | closing |
//! |-----|-------|---------------------------|---------|
//! | 1   | θ₀    | x                         | -       |
//! | 2   | θ₀    | x                         | θ₁      |
//! | 3   | θ₀    | θ₁·x                      | θ₂      |
//! | 4   | θ₀    | θ₁·x + θ₂                 | θ₃      |
//! | 5   | θ₀    | θ₁²·x + θ₂·x + θ₃         | θ₄      |
//!
//! Parameters are laid out block by block: layer-major, then feature.

use std::fmt;
use std::ops::{Deref, DerefMut};

use crate::dataio::Dataset;
use crate::qcore::{apply_gate, expectation_z, rotation, PureState, RotationAxis, Unitary2};
use crate::{QruError, Real, Result};

/// Axis layout and parameter count of one feature block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodingScheme {
    pub outer_axis: RotationAxis,
    pub middle_axis: RotationAxis,
    pub closing_axis: RotationAxis,
    pub params_per_input: usize,
    pub triplet: bool,
}

impl EncodingScheme {
    /// `R_a(θ) - R_b(·) - R_a(θ)` with `a ≠ b`.
    pub fn sandwich(outer: RotationAxis, middle: RotationAxis, params_per_input: usize) -> Result<Self> {
        if outer == middle {
            return Err(QruError::invalid("sandwich layout needs two distinct axes"));
        }
        check_ppi(params_per_input)?;
        Ok(Self {
            outer_axis: outer,
            middle_axis: middle,
            closing_axis: outer,
            params_per_input,
            triplet: false,
        })
    }

    /// Three distinct axes, e.g. `R_x - R_y - R_z`.
    pub fn triplet(
        outer: RotationAxis,
        middle: RotationAxis,
        closing: RotationAxis,
        params_per_input: usize,
    ) -> Result<Self> {
        if outer == middle || middle == closing || outer == closing {
            return Err(QruError::invalid("triplet layout needs three distinct axes"));
        }
        check_ppi(params_per_input)?;
        Ok(Self {
            outer_axis: outer,
            middle_axis: middle,
            closing_axis: closing,
            params_per_input,
            triplet: true,
        })
    }

    /// Parses a three-letter axis string such as `"xyx"` or `"xyz"`.
    pub fn from_axes(axes: &str, params_per_input: usize) -> Result<Self> {
        let parsed: Vec<_> = axes.trim().chars().map(RotationAxis::from_char).collect();
        match parsed.as_slice() {
            [Some(a), Some(b), Some(c)] if a == c => Self::sandwich(*a, *b, params_per_input),
            [Some(a), Some(b), Some(c)] => Self::triplet(*a, *b, *c, params_per_input),
            _ => Err(QruError::invalid(format!("axis layout '{axes}' must be three of x/y/z"))),
        }
    }

    pub fn axes_label(&self) -> String {
        [self.outer_axis, self.middle_axis, self.closing_axis]
            .iter()
            .map(|a| a.as_char())
            .collect()
    }

    /// Parameters feeding the middle (encoding) gate.
    pub fn middle_param_count(&self) -> usize {
        self.params_per_input.saturating_sub(2)
    }

    pub fn has_closing_gate(&self) -> bool {
        self.params_per_input >= 2
    }

    /// No additive bias inside the encoding gate (ppi ≤ 3).
    pub fn is_bias_free(&self) -> bool {
        self.params_per_input <= 3
    }
}

impl Default for EncodingScheme {
    fn default() -> Self {
        Self::sandwich(RotationAxis::X, RotationAxis::Y, 3).expect("valid default scheme")
    }
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/ppi{}", self.axes_label(), self.params_per_input)
    }
}

fn check_ppi(ppi: usize) -> Result<()> {
    if (1..=5).contains(&ppi) {
        Ok(())
    } else {
        Err(QruError::invalid(format!("parameters per input must be in 1..=5, got {ppi}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircuitSpec {
    pub depth: usize,
    pub n_features: usize,
    pub scheme: EncodingScheme,
}

impl CircuitSpec {
    pub fn new(depth: usize, n_features: usize, scheme: EncodingScheme) -> Result<Self> {
        if depth == 0 || n_features == 0 {
            return Err(QruError::invalid("depth and feature count must be at least 1"));
        }
        Ok(Self { depth, n_features, scheme })
    }

    pub fn param_count(&self) -> usize {
        param_count(self)
    }
}

pub fn param_count(spec: &CircuitSpec) -> usize {
    spec.depth * spec.n_features * spec.scheme.params_per_input
}

/// Trainable angles, one block of `params_per_input` values per (layer, feature).
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector<T> {
    values: Vec<T>,
}

impl<T: Real> ParamVector<T> {
    pub fn new(spec: &CircuitSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != param_count(spec) {
            return Err(QruError::layout(format!(
                "expected {} parameters, got {}",
                param_count(spec),
                values.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn constant(spec: &CircuitSpec, value: T) -> Self {
        Self { values: vec![value; param_count(spec)] }
    }

    pub fn into_inner(self) -> Vec<T> {
        self.values
    }
}

impl<T> Deref for ParamVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.values
    }
}

impl<T> DerefMut for ParamVector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.values
    }
}

/// Middle-gate angle for one feature value.
pub fn encoded_angle<T: Real>(scheme: &EncodingScheme, theta_slice: &[T], x: T) -> Result<T> {
    if theta_slice.len() != scheme.middle_param_count() {
        return Err(QruError::layout(format!(
            "encoding gate of ppi {} takes {} parameters, got {}",
            scheme.params_per_input,
            scheme.middle_param_count(),
            theta_slice.len()
        )));
    }
    Ok(angle_and_partials(theta_slice, x).0)
}

/// Angle and its partial derivatives w.r.t. each slice entry.
fn angle_and_partials<T: Real>(theta: &[T], x: T) -> (T, [T; 3]) {
    let z = T::zero();
    match *theta {
        [] => (x, [z; 3]),
        [a] => (a * x, [x, z, z]),
        [a, b] => (a * x + b, [x, T::one(), z]),
        [a, b, c] => (a * a * x + b * x + c, [T::lit(2.0) * a * x, x, T::one()]),
        _ => unreachable!("slice length checked by the layout"),
    }
}

#[derive(Clone, Copy, Debug)]
struct Gate<T> {
    axis: RotationAxis,
    angle: T,
    /// (parameter index, ∂angle/∂θ) pairs; `n_deps` of them are live.
    deps: [(usize, T); 3],
    n_deps: usize,
}

fn check_inputs<T: Real>(spec: &CircuitSpec, params: &[T], x: &[T]) -> Result<()> {
    if params.len() != param_count(spec) {
        return Err(QruError::layout(format!(
            "expected {} parameters, got {}",
            param_count(spec),
            params.len()
        )));
    }
    if x.len() != spec.n_features {
        return Err(QruError::layout(format!(
            "expected {} features, got {}",
            spec.n_features,
            x.len()
        )));
    }
    if !params.iter().chain(x).all(|v| v.is_finite()) {
        return Err(QruError::invalid("parameters and features must be finite"));
    }
    Ok(())
}

fn for_each_gate<T: Real>(spec: &CircuitSpec, params: &[T], x: &[T], mut f: impl FnMut(Gate<T>)) {
    let scheme = &spec.scheme;
    let ppi = scheme.params_per_input;
    let n_mid = scheme.middle_param_count();
    let z = T::zero();
    for layer in 0..spec.depth {
        for (j, &xj) in x.iter().enumerate() {
            let base = (layer * spec.n_features + j) * ppi;
            f(Gate {
                axis: scheme.outer_axis,
                angle: params[base],
                deps: [(base, T::one()), (0, z), (0, z)],
                n_deps: 1,
            });
            let mid = &params[base + 1..base + 1 + n_mid];
            let (angle, partials) = angle_and_partials(mid, xj);
            let mut deps = [(0, z); 3];
            for (k, d) in deps.iter_mut().enumerate().take(n_mid) {
                *d = (base + 1 + k, partials[k]);
            }
            f(Gate { axis: scheme.middle_axis, angle, deps, n_deps: n_mid });
            if scheme.has_closing_gate() {
                let k = base + ppi - 1;
                f(Gate {
                    axis: scheme.closing_axis,
                    angle: params[k],
                    deps: [(k, T::one()), (0, z), (0, z)],
                    n_deps: 1,
                });
            }
        }
    }
}

/// `U(θ, x)|0⟩`.
pub fn output_state<T: Real>(spec: &CircuitSpec, params: &[T], x: &[T]) -> Result<PureState<T>> {
    check_inputs(spec, params, x)?;
    let mut state = PureState::zero();
    let mut finite = true;
    for_each_gate(spec, params, x, |g| {
        finite &= g.angle.is_finite();
        state = apply_gate(&state, &rotation(g.axis, g.angle));
    });
    if !finite {
        return Err(non_finite_angle());
    }
    Ok(state)
}

fn non_finite_angle() -> QruError {
    QruError::numeric("an encoded gate angle overflowed")
}

/// Hypothesis `h_θ(x) = ⟨0|U† Z U|0⟩ ∈ [−1, 1]`.
pub fn forward<T: Real>(spec: &CircuitSpec, params: &[T], x: &[T]) -> Result<T> {
    Ok(expectation_z(&output_state(spec, params, x)?))
}

/// `∂h/∂θ_k` for every parameter.
pub fn gradient<T: Real>(spec: &CircuitSpec, params: &[T], x: &[T]) -> Result<Vec<T>> {
    forward_and_gradient(spec, params, x).map(|(_, g)| g)
}

/// Hypothesis value and its exact gradient.
///
/// Each gate angle is differentiated with the parameter-shift rule
/// `[h(φ+π/2) − h(φ−π/2)] / 2`; the result is pushed to the parameters
/// through the encoding polynomial. Prefix states and suffix products make
/// every shifted evaluation O(1).
pub fn forward_and_gradient<T: Real>(spec: &CircuitSpec, params: &[T], x: &[T]) -> Result<(T, Vec<T>)> {
    check_inputs(spec, params, x)?;
    let mut gates = Vec::with_capacity(spec.depth * spec.n_features * 3);
    for_each_gate(spec, params, x, |g| gates.push(g));
    if !gates.iter().all(|g| g.angle.is_finite()) {
        return Err(non_finite_angle());
    }

    let mut prefix = Vec::with_capacity(gates.len() + 1);
    prefix.push(PureState::zero());
    for g in &gates {
        let next = apply_gate(prefix.last().expect("nonempty"), &rotation(g.axis, g.angle));
        prefix.push(next);
    }
    let h = expectation_z(prefix.last().expect("nonempty"));

    let shift = T::FRAC_PI_2();
    let half = T::lit(0.5);
    let mut grad = vec![T::zero(); params.len()];
    let mut suffix = Unitary2::identity();
    for (k, g) in gates.iter().enumerate().rev() {
        if g.n_deps > 0 {
            let eval = |angle: T| {
                let s = apply_gate(&prefix[k], &rotation(g.axis, angle));
                expectation_z(&apply_gate(&s, &suffix))
            };
            let dh = (eval(g.angle + shift) - eval(g.angle - shift)) * half;
            for &(idx, dphi) in &g.deps[..g.n_deps] {
                grad[idx] += dh * dphi;
            }
        }
        suffix = suffix * rotation(g.axis, g.angle);
    }
    if !grad.iter().all(|v| v.is_finite()) {
        return Err(QruError::numeric("gradient is not finite"));
    }
    Ok((h, grad))
}

/// Index of the nearest target; ties go to the lower index.
pub fn predict_class<T: Real>(h: T, targets: &[T]) -> Result<usize> {
    if targets.is_empty() {
        return Err(QruError::invalid("class targets must not be empty"));
    }
    let mut best = 0;
    let mut best_d = (h - targets[0]).abs();
    for (i, &t) in targets.iter().enumerate().skip(1) {
        let d = (h - t).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    Ok(best)
}

/// Evenly spaced targets `−1 + 2k/(n−1)`; a single class maps to 0.
pub fn default_targets<T: Real>(n_classes: usize) -> Vec<T> {
    match n_classes {
        0 => Vec::new(),
        1 => vec![T::zero()],
        n => (0..n)
            .map(|k| T::lit(-1.0 + 2.0 * k as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Fraction of records whose decoded class equals their label.
pub fn evaluate<T: Real>(spec: &CircuitSpec, params: &[T], dataset: &Dataset, targets: &[T]) -> Result<T> {
    if dataset.is_empty() {
        return Err(QruError::invalid("cannot evaluate on an empty dataset"));
    }
    let mut x = vec![T::zero(); spec.n_features];
    let mut hits = 0usize;
    for rec in dataset.records() {
        if rec.features.len() != spec.n_features {
            return Err(QruError::layout("record arity does not match the circuit"));
        }
        for (dst, &src) in x.iter_mut().zip(&rec.features) {
            *dst = T::lit(src);
        }
        let h = forward(spec, params, &x)?;
        if predict_class(h, targets)? == rec.label {
            hits += 1;
        }
    }
    Ok(T::lit(hits as f64 / dataset.len() as f64))
}
