//! Hand-written neural building blocks: dense layers, activations, dropout,
//! loss, optimizers, a two-hidden-layer perceptron baseline, and a
//! finite-difference gradient checker. All gradients are derived by hand.

mod activation;
mod checkpoint;
mod dense;
mod dropout;
mod gradcheck;
mod hyper;
mod loss;
mod mlp;
mod ops;
mod optim;
mod params;

pub use activation::Activation;
pub use checkpoint::{Checkpoint, ParamRecord, CHECKPOINT_FORMAT};
pub use dense::DenseLayer;
pub use dropout::{dropout_mask, dropout_mask_keyed};
pub use gradcheck::{gradient_check, GradCheckReport, FD_STEP};
pub use hyper::{Aggregation, Hyperparameters, OptimizerKind};
pub use loss::{masked_mse, mse_loss};
pub use mlp::{train_mlp, Mlp, MlpCache};
pub use ops::DropoutStream;
pub use optim::OptimizerState;
pub use params::{flatten, unflatten, Parameters};

pub(crate) use checkpoint::{dense_from_records, parse_setting};
pub(crate) use mlp::{fit, head_init_seed, layer_init_seed, HIDDEN_LAYERS};
pub(crate) use ops::{activate_masked, activation_backward, layer_mask, linear_param_grads};
pub(crate) use params::{slice1, slice1_mut, slice2, slice2_mut};

/// Training-time options that are not hyperparameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainOptions {
    /// Keep the edge scorer at its current parameters.
    pub freeze_scorer: bool,
}

/// Result of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<M> {
    pub model: M,
    /// Training loss per epoch, measured on the forward pass of that epoch.
    pub loss_history: Vec<f64>,
    /// Global ids of every node whose target entered a loss term.
    pub loss_ids: Vec<usize>,
}
