//! Desk-scale laboratory for memorization of noisy labels.
//!
//! * [`data`]: synthetic and IDX datasets, label-noise injection, probe batches.
//! * [`nn`]: the two-layer ReLU network, a small MLP, losses and training loops.
//! * [`susceptibility`]: the probe step and running susceptibility ζ(t).
//! * [`ntk`]: the infinite-width Gram matrix, its spectrum and the closed-form
//!   convergence predictions and bound curves.
//! * [`selection`]: correlation statistics and checkpoint selection by region.
//! * [`experiment`]: JSON run configurations and the run executor.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the double-precision types used by the experiment runner.

pub mod data;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod ntk;
pub mod record;
pub mod rng;
pub mod scalar;
pub mod selection;
pub mod susceptibility;

pub use error::{Error, Result};
pub use record::CheckpointRecord;
pub use scalar::Scalar;

pub type Dataset = data::LabeledDataset<f64>;
pub type Probe = data::ProbeBatch<f64>;
pub type TwoLayerNet = nn::TwoLayerReluNet<f64>;
pub type Mlp = nn::MlpClassifier<f64>;
pub type Network = nn::Model<f64>;
pub type State = nn::TrainState<f64>;
pub type Tracker = susceptibility::SusceptibilityTracker<f64>;
pub type Spectrum = ntk::GramSpectrum<f64>;
