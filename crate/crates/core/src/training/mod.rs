//! Losses, optimizers, learning-rate schedules and the training loop.

mod fit;
mod loss;
mod optimizer;
mod schedule;

pub use fit::{fit, trainability, InitKind, TrainConfig, TrainReport};
pub use loss::{loss_and_grad, LossKind};
pub use optimizer::{optimizer_step, Optimizer, OptimizerHyper, OptimizerKind, OptimizerState};
pub use schedule::{lr_at_epoch, LrSchedule};
