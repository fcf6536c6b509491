//! Exact single-qubit state algebra.
//!
//! Rotations follow `R_a(φ) = exp(−i φ σ_a / 2)`. Global phase is never
//! observable here, so comparisons between unitaries are phase-invariant.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{QruError, Real, Result};

pub type ComplexAmp<T> = Complex<T>;

/// Pure state `a0|0⟩ + a1|1⟩` with unit norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState<T> {
    a0: Complex<T>,
    a1: Complex<T>,
}

impl<T: Real> PureState<T> {
    /// `|0⟩`
    pub fn zero() -> Self {
        Self {
            a0: Complex::new(T::one(), T::zero()),
            a1: Complex::new(T::zero(), T::zero()),
        }
    }

    /// `|1⟩`
    pub fn one() -> Self {
        Self {
            a0: Complex::new(T::zero(), T::zero()),
            a1: Complex::new(T::one(), T::zero()),
        }
    }

    /// Builds a state from (possibly unnormalized) amplitudes.
    pub fn new(a0: Complex<T>, a1: Complex<T>) -> Result<Self> {
        let finite = [a0.re, a0.im, a1.re, a1.im].iter().all(|v| v.is_finite());
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if !finite || norm <= T::epsilon() {
            return Err(QruError::invalid("state amplitudes must be finite and not both zero"));
        }
        Ok(Self { a0: a0 / norm, a1: a1 / norm })
    }

    pub fn amplitudes(&self) -> (Complex<T>, Complex<T>) {
        (self.a0, self.a1)
    }

    pub fn norm_sqr(&self) -> T {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.a0.re, self.a0.im, self.a1.re, self.a1.im]
            .iter()
            .all(|v| v.is_finite())
    }

    fn renormalized(self) -> Self {
        let n2 = self.norm_sqr();
        if (n2 - T::one()).abs() > T::drift_tol() && n2 > T::zero() {
            let n = n2.sqrt();
            Self { a0: self.a0 / n, a1: self.a1 / n }
        } else {
            self
        }
    }
}

/// Row-major 2×2 unitary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2<T> {
    m: [[Complex<T>; 2]; 2],
}

impl<T: Real> Unitary2<T> {
    pub fn identity() -> Self {
        let o = Complex::new(T::one(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        Self { m: [[o, z], [z, o]] }
    }

    /// Checked constructor; rejects matrices that are not unitary.
    pub fn from_rows(rows: [[Complex<T>; 2]; 2]) -> Result<Self> {
        let u = Self { m: rows };
        if !u.is_unitary(T::check_tol()) {
            return Err(QruError::invalid("matrix is not unitary"));
        }
        Ok(u)
    }

    pub(crate) fn from_rows_unchecked(rows: [[Complex<T>; 2]; 2]) -> Self {
        Self { m: rows }
    }

    pub fn rows(&self) -> [[Complex<T>; 2]; 2] {
        self.m
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        Self {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Max entrywise deviation of `U†U` from the identity is at most `tol`.
    pub fn is_unitary(&self, tol: T) -> bool {
        let p = self.dagger() * *self;
        let id = Self::identity();
        let finite = self.m.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite());
        finite && max_entry_diff(&p, &id) <= tol
    }

    /// Equality up to a global phase, entrywise within `tol`.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: T) -> bool {
        // Align phases on the largest entry of `other`.
        let (mut bi, mut bj, mut best) = (0, 0, T::zero());
        for i in 0..2 {
            for j in 0..2 {
                let n = other.m[i][j].norm();
                if n > best {
                    best = n;
                    bi = i;
                    bj = j;
                }
            }
        }
        if best == T::zero() {
            return false;
        }
        let ratio = self.m[bi][bj] / other.m[bi][bj];
        let rn = ratio.norm();
        if rn == T::zero() || !rn.is_finite() {
            return false;
        }
        let phase = ratio / rn;
        let mut scaled = *other;
        for row in scaled.m.iter_mut() {
            for c in row.iter_mut() {
                *c = *c * phase;
            }
        }
        max_entry_diff(self, &scaled) <= tol
    }
}

fn max_entry_diff<T: Real>(a: &Unitary2<T>, b: &Unitary2<T>) -> T {
    let mut d = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a.m[i][j] - b.m[i][j]).norm());
        }
    }
    d
}

impl<T: Real> Mul for Unitary2<T> {
    type Output = Unitary2<T>;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut m = [[Complex::new(T::zero(), T::zero()); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Unitary2 { m }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

impl RotationAxis {
    pub const ALL: [RotationAxis; 3] = [RotationAxis::X, RotationAxis::Y, RotationAxis::Z];

    pub fn as_char(self) -> char {
        match self {
            RotationAxis::X => 'x',
            RotationAxis::Y => 'y',
            RotationAxis::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            'x' => Some(RotationAxis::X),
            'y' => Some(RotationAxis::Y),
            'z' => Some(RotationAxis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for RotationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.as_char())
    }
}

impl FromStr for RotationAxis {
    type Err = QruError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches(['R', 'r']);
        let mut chars = t.chars();
        match (chars.next().and_then(Self::from_char), chars.next()) {
            (Some(a), None) => Ok(a),
            _ => Err(QruError::invalid(format!("unknown rotation axis '{s}'"))),
        }
    }
}

/// `exp(−i angle σ_axis / 2)`.
pub fn rotation_matrix<T: Real>(axis: RotationAxis, angle: T) -> Result<Unitary2<T>> {
    if !angle.is_finite() {
        return Err(QruError::invalid("rotation angle must be finite"));
    }
    Ok(rotation(axis, angle))
}

pub(crate) fn rotation<T: Real>(axis: RotationAxis, angle: T) -> Unitary2<T> {
    let half = angle * T::lit(0.5);
    let (s, c) = half.sin_cos();
    let z = T::zero();
    let cc = Complex::new(c, z);
    let m = match axis {
        RotationAxis::X => {
            let mis = Complex::new(z, -s);
            [[cc, mis], [mis, cc]]
        }
        RotationAxis::Y => [[cc, Complex::new(-s, z)], [Complex::new(s, z), cc]],
        RotationAxis::Z => [[Complex::new(c, -s), Complex::new(z, z)], [Complex::new(z, z), Complex::new(c, s)]],
    };
    Unitary2::from_rows_unchecked(m)
}

/// `u |state⟩`, renormalized when the norm drifts past the drift tolerance.
pub fn apply_gate<T: Real>(state: &PureState<T>, u: &Unitary2<T>) -> PureState<T> {
    let m = &u.m;
    PureState {
        a0: m[0][0] * state.a0 + m[0][1] * state.a1,
        a1: m[1][0] * state.a0 + m[1][1] * state.a1,
    }
    .renormalized()
}

/// `⟨Z⟩ = |a0|² − |a1|²`.
pub fn expectation_z<T: Real>(state: &PureState<T>) -> T {
    // Clamp rounding overshoot; a NaN must stay NaN.
    let v = state.a0.norm_sqr() - state.a1.norm_sqr();
    if v > T::one() {
        T::one()
    } else if v < -T::one() {
        -T::one()
    } else {
        v
    }
}

/// `|⟨s1|s2⟩|²`.
pub fn state_fidelity<T: Real>(s1: &PureState<T>, s2: &PureState<T>) -> T {
    let ip = s1.a0.conj() * s2.a0 + s1.a1.conj() * s2.a1;
    ip.norm_sqr().max(T::zero()).min(T::one())
}

/// Haar-random state, deterministic per seed.
pub fn haar_state<T: Real>(rng_seed: u64) -> PureState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    haar_state_from_rng(&mut rng)
}

/// Haar-random state from two standard complex Gaussians.
pub fn haar_state_from_rng<T: Real, R: Rng + ?Sized>(rng: &mut R) -> PureState<T> {
    loop {
        let g: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let a0 = Complex::new(T::lit(g[0]), T::lit(g[1]));
        let a1 = Complex::new(T::lit(g[2]), T::lit(g[3]));
        if let Ok(s) = PureState::new(a0, a1) {
            return s;
        }
    }
}

/// `R_z(phi) · R_y(theta) · R_x(psi)`.
pub fn euler_zyx_compose<T: Real>(phi: T, theta: T, psi: T) -> Unitary2<T> {
    rotation(RotationAxis::Z, phi) * rotation(RotationAxis::Y, theta) * rotation(RotationAxis::X, psi)
}

/// Finds `(phi, theta, psi)` with `u ≃ R_z(phi) R_y(theta) R_x(psi)` up to global phase.
///
/// Works through the SO(3) image `R_ij = ½ Tr(σ_i U σ_j U†)`; `theta` lies in
/// `[−π/2, π/2]` and at gimbal lock `psi` is pinned to zero.
pub fn euler_zyx_decompose<T: Real>(u: &Unitary2<T>) -> Result<(T, T, T)> {
    if !u.is_unitary(T::check_tol()) {
        return Err(QruError::invalid("euler decomposition requires a unitary matrix"));
    }
    let r = so3_image(u);
    let cos_theta = r[0][0].hypot(r[1][0]);
    let theta = (-r[2][0]).atan2(cos_theta);
    if cos_theta > T::lit(1e-12) {
        let phi = r[1][0].atan2(r[0][0]);
        let psi = r[2][1].atan2(r[2][2]);
        Ok((phi, theta, psi))
    } else {
        let phi = (-r[0][1]).atan2(r[1][1]);
        Ok((phi, theta, T::zero()))
    }
}

fn pauli<T: Real>(axis: RotationAxis) -> Unitary2<T> {
    let (o, z) = (T::one(), T::zero());
    let m = match axis {
        RotationAxis::X => [[Complex::new(z, z), Complex::new(o, z)], [Complex::new(o, z), Complex::new(z, z)]],
        RotationAxis::Y => [[Complex::new(z, z), Complex::new(z, -o)], [Complex::new(z, o), Complex::new(z, z)]],
        RotationAxis::Z => [[Complex::new(o, z), Complex::new(z, z)], [Complex::new(z, z), Complex::new(-o, z)]],
    };
    Unitary2::from_rows_unchecked(m)
}

fn so3_image<T: Real>(u: &Unitary2<T>) -> [[T; 3]; 3] {
    let ud = u.dagger();
    let mut r = [[T::zero(); 3]; 3];
    for (i, ai) in RotationAxis::ALL.iter().enumerate() {
        for (j, aj) in RotationAxis::ALL.iter().enumerate() {
            let p = pauli::<T>(*ai) * *u * pauli::<T>(*aj) * ud;
            r[i][j] = (p.m[0][0] + p.m[1][1]).re * T::lit(0.5);
        }
    }
    r
}
