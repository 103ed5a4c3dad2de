//! A small fully connected classifier with hand-written backprop.
//!
//! Parameters are flattened layer by layer, each layer as its
//! `fan_in × fan_out` weight matrix (row-major) followed by its bias, so a
//! trained network is just another point for the landscape tools.

pub mod checkpoint;
mod data;
mod model;
mod train;

pub use data::{generate_dataset, load_csv, Dataset, DatasetKind, Samples, Split};
pub use model::{
    argmax_rows, cross_entropy, flatten, forward, init_params, l2_penalty, loss_and_grad, min_preactivation,
    predict_labels, predict_proba, softmax, unflatten, Activation, LayerShape, MlpSpec, Regularization,
};
pub use train::{
    accuracy, evaluate, prediction_change_profile, train, train_from, EpochRecord, NetOptimizer, NetOracle,
    TrainConfig, TrainOutcome,
};
