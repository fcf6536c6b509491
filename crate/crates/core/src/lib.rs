//! Single-qubit data re-uploading (QRU) classifier toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`] exact single-qubit state algebra (rotations, expectation, fidelity, Haar states).
//! * [`circuit`] the re-uploading circuit family, its forward pass and exact gradients.
//! * [`training`] losses, optimizers, learning-rate schedules and the training loop.
//! * [`dataio`] calorimeter feature records, normalization, splitting and synthetic data.
//! * [`hpo`] Gaussian-process Bayesian search and Hyperband over a discrete grid.
//! * [`analysis`] hypothesis curves, Fourier spectra, expressibility and parity diagnostics.
//!
//! The numerical core is generic over the scalar type through [`Real`]; the
//! aliases below fix it to `f64` (the default everywhere in the CLI) or `f32`.

pub mod analysis;
pub mod circuit;
pub mod dataio;
mod error;
pub mod hpo;
pub mod qcore;
mod scalar;
pub mod training;

pub use error::{QruError, Result};
pub use scalar::Real;

pub type ComplexAmpF64 = qcore::ComplexAmp<f64>;
pub type PureStateF64 = qcore::PureState<f64>;
pub type PureStateF32 = qcore::PureState<f32>;
pub type Unitary2F64 = qcore::Unitary2<f64>;
pub type Unitary2F32 = qcore::Unitary2<f32>;
pub type ParamVectorF64 = circuit::ParamVector<f64>;
pub type ParamVectorF32 = circuit::ParamVector<f32>;
pub type LossKindF64 = training::LossKind<f64>;
pub type OptimizerF64 = training::Optimizer<f64>;
pub type OptimizerF32 = training::Optimizer<f32>;
pub type TrainConfigF64 = training::TrainConfig<f64>;
pub type TrainConfigF32 = training::TrainConfig<f32>;
pub type TrainReportF64 = training::TrainReport<f64>;
pub type TrainReportF32 = training::TrainReport<f32>;
pub type CurveSampleF64 = analysis::CurveSample<f64>;
pub type SpectrumFitF64 = analysis::SpectrumFit<f64>;
