//! Run configuration file.
//!
//! TOML with dotted keys, every key optional:
//!
//! ```toml
//! depth = 4
//! scheme.axes = "xyx"
//! scheme.ppi = 3
//! lr = 5e-4
//! optimizer = "adam"
//! loss.kind = "huber"
//! loss.delta = 1.0
//! batch_size = 1
//! epochs = 30
//! seed = 0
//! init.kind = "gaussian"   # or "constant" (uses init.value)
//! init.std = 0.1
//! normalization.lo = "-pi"
//! normalization.hi = "pi"
//! split_ratio = 0.8
//! targets = [-1.0, 0.0, 1.0]
//! schedule = "step"        # or "constant"
//! ```

use std::f64::consts::PI;
use std::path::Path;

use qru_core::circuit::{default_targets, CircuitSpec, EncodingScheme};
use qru_core::dataio::{N_CLASSES, N_FEATURES};
use qru_core::training::{InitKind, LossKind, LrSchedule, Optimizer, OptimizerKind, TrainConfig};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub depth: usize,
    pub scheme: SchemeSection,
    pub lr: f64,
    pub optimizer: String,
    pub loss: LossSection,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub init: InitSection,
    pub normalization: NormSection,
    pub split_ratio: f64,
    pub targets: Option<Vec<f64>>,
    pub schedule: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSection {
    pub axes: String,
    pub ppi: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossSection {
    pub kind: String,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    pub kind: String,
    pub value: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormSection {
    #[serde(deserialize_with = "angle")]
    pub lo: f64,
    #[serde(deserialize_with = "angle")]
    pub hi: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            depth: 4,
            scheme: SchemeSection::default(),
            lr: 5e-4,
            optimizer: "adam".into(),
            loss: LossSection::default(),
            batch_size: 1,
            epochs: 30,
            seed: 0,
            init: InitSection::default(),
            normalization: NormSection::default(),
            split_ratio: 0.8,
            targets: None,
            schedule: "constant".into(),
        }
    }
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self { axes: "xyx".into(), ppi: 3 }
    }
}

impl Default for LossSection {
    fn default() -> Self {
        Self { kind: "l2".into(), delta: 1.0 }
    }
}

impl Default for InitSection {
    fn default() -> Self {
        Self { kind: "constant".into(), value: 0.5, mean: 0.5, std: 0.1 }
    }
}

impl Default for NormSection {
    fn default() -> Self {
        Self { lo: -PI, hi: PI }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Num(f64),
    Int(i64),
    Text(String),
}

fn angle<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match AngleRepr::deserialize(d)? {
        AngleRepr::Num(v) => Ok(v),
        AngleRepr::Int(v) => Ok(v as f64),
        AngleRepr::Text(s) => parse_angle(&s).ok_or_else(|| serde::de::Error::custom(format!("bad angle '{s}'"))),
    }
}

/// Reads a number or a multiple of pi: `1.5`, `pi`, `-pi`, `2pi`, `pi/2`, `-3pi/4`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let t = s.trim().to_ascii_lowercase().replace(['*', ' '], "");
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (coef, rest) = t.split_once("pi")?;
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let d = match rest {
        "" => 1.0,
        r => r.strip_prefix('/')?.parse::<f64>().ok()?,
    };
    let v = c * PI / d;
    v.is_finite().then_some(v)
}

/// `pm-pi` for `[−π, π]`, `0-2pi` for `[0, 2π]`, otherwise `lo:hi`.
pub fn parse_norm_range(s: &str) -> Option<(f64, f64)> {
    match s.trim() {
        "pm-pi" => Some((-PI, PI)),
        "0-2pi" => Some((0.0, 2.0 * PI)),
        other => {
            let (lo, hi) = other.split_once(':')?;
            Some((parse_angle(lo)?, parse_angle(hi)?))
        }
    }
}

pub fn parse_loss(kind: &str, delta: f64) -> CliResult<LossKind<f64>> {
    match kind.trim().to_ascii_lowercase().as_str() {
        "l1" => Ok(LossKind::L1),
        "l2" => Ok(LossKind::L2),
        "huber" => LossKind::huber(delta).map_err(CliError::from),
        other => Err(CliError::usage(format!("unknown loss '{other}' (l1, l2, huber)"))),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn n_classes(&self) -> usize {
        self.targets.as_ref().map_or(N_CLASSES, Vec::len)
    }

    pub fn norm_range(&self) -> (f64, f64) {
        (self.normalization.lo, self.normalization.hi)
    }

    pub fn circuit_spec(&self) -> CliResult<CircuitSpec> {
        let scheme = EncodingScheme::from_axes(&self.scheme.axes, self.scheme.ppi)?;
        Ok(CircuitSpec::new(self.depth, N_FEATURES, scheme)?)
    }

    /// Checks every key and builds the trainer configuration.
    pub fn train_config(&self) -> CliResult<TrainConfig<f64>> {
        let spec = self.circuit_spec()?;
        let kind: OptimizerKind = self.optimizer.parse()?;
        let init = match self.init.kind.trim().to_ascii_lowercase().as_str() {
            "constant" => InitKind::Constant(self.init.value),
            "gaussian" => InitKind::Gaussian { mean: self.init.mean, std: self.init.std },
            other => return Err(CliError::usage(format!("unknown init.kind '{other}' (constant, gaussian)"))),
        };
        let schedule = match self.schedule.trim().to_ascii_lowercase().as_str() {
            "constant" => LrSchedule::Constant,
            "step" => LrSchedule::StepDecay,
            other => return Err(CliError::usage(format!("unknown schedule '{other}' (constant, step)"))),
        };
        let (lo, hi) = self.norm_range();
        if !(lo < hi) {
            return Err(CliError::usage("normalization.lo must be below normalization.hi"));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(CliError::usage("split_ratio must lie strictly between 0 and 1"));
        }
        let targets = match &self.targets {
            Some(t) if t.len() < 2 => return Err(CliError::usage("targets needs at least two classes")),
            Some(t) => t.clone(),
            None => default_targets(N_CLASSES),
        };
        let cfg = TrainConfig {
            spec,
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            optimizer: Optimizer::new(kind),
            loss: parse_loss(&self.loss.kind, self.loss.delta)?,
            seed: self.seed,
            init,
            schedule,
            targets,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
