//! Minimal dense-network numerics: matrices, layers, loss, Adam and
//! finite-difference gradient checks.

mod adam;
mod gradcheck;
mod layer;
mod loss;
mod matrix;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{
    compare_gradients, finite_difference_check, grad_check, numeric_gradients, relative_error,
    GradCheck, FD_STEP,
};
pub use layer::{
    sigmoid, Activation, Backprop, DenseLayer, ForwardTrace, LayerCache, LayerGrads, Network, NetworkGrads,
};
pub use loss::{bce_loss, half_squared_error, Loss, LossValue, PROB_EPS};
pub use matrix::Matrix;
