//! Feedforward regression network trained with Levenberg-Marquardt or a
//! first-order baseline.

pub mod backprop;
pub mod first_order;
pub mod lm;
pub mod model;
pub mod train;

pub use backprop::{gradient, jacobian_accumulate, NormalEquations, TrainingSet};
pub use first_order::{FirstOrderAlgorithm, FirstOrderConfig};
pub use lm::{lm_epoch, LeastSquares, LmConfig, LmState};
pub use model::{Activation, Architecture, MlpModel, ModelFile, DEFAULT_LAYER_SIZES};
pub use train::{
    train, write_history_csv, EpochRecord, StopReason, TrainConfig, TrainOutcome, Trainer,
};
