use crate::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LrSchedule {
    #[default]
    Constant,
    /// Divide by 10 at `floor(E/2)` and again at `floor(3E/4)`.
    StepDecay,
}

pub fn lr_at_epoch<T: Real>(schedule: LrSchedule, base_lr: T, epoch: usize, total_epochs: usize) -> T {
    match schedule {
        LrSchedule::Constant => base_lr,
        LrSchedule::StepDecay => {
            let ten = T::lit(10.0);
            if epoch < total_epochs / 2 {
                base_lr
            } else if epoch < 3 * total_epochs / 4 {
                base_lr / ten
            } else {
                base_lr / (ten * ten)
            }
        }
    }
}
