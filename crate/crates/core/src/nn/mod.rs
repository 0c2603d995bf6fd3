//! Networks, losses and the gradient-descent training loop.

mod loss;
mod mlp;
mod optim;
mod train;
mod two_layer;

pub use loss::{cross_entropy, cross_entropy_with_grad, squared_loss};
pub use mlp::{Dense, MlpClassifier, MlpGradient};
pub use optim::{lr_at, OptimizerConfig, Schedule};
pub use train::{accuracy, gd_step, train_mlp_epoch, EpochMetrics, Gradient, Model, TrainState};
pub use two_layer::{forward_two_layer, grad_two_layer, init_two_layer, TwoLayerReluNet};
