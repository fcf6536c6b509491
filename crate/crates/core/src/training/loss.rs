use std::fmt;

use crate::{QruError, Real, Result};

/// Per-sample regression loss between a class target `y` and the circuit output `ŷ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossKind<T> {
    L1,
    L2,
    Huber { delta: T },
}

impl<T: Real> LossKind<T> {
    pub fn huber(delta: T) -> Result<Self> {
        if !(delta.is_finite() && delta > T::zero()) {
            return Err(QruError::invalid("Huber delta must be finite and positive"));
        }
        Ok(LossKind::Huber { delta })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::L1 => "l1",
            LossKind::L2 => "l2",
            LossKind::Huber { .. } => "huber",
        }
    }
}

impl<T: Real> fmt::Display for LossKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Loss and `∂loss/∂ŷ`. The L1 derivative at zero residual is taken as 0.
pub fn loss_and_grad<T: Real>(kind: LossKind<T>, y: T, yhat: T) -> (T, T) {
    let r = yhat - y;
    let sign = if r > T::zero() {
        T::one()
    } else if r < T::zero() {
        -T::one()
    } else {
        T::zero()
    };
    match kind {
        LossKind::L1 => (r.abs(), sign),
        LossKind::L2 => (r * r, T::lit(2.0) * r),
        LossKind::Huber { delta } => {
            if r.abs() <= delta {
                (T::lit(0.5) * r * r, r)
            } else {
                (delta * (r.abs() - T::lit(0.5) * delta), delta * sign)
            }
        }
    }
}
