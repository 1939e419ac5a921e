//! Dense and recurrent layer math with hand-derived gradients, the MAE loss,
//! the Nadam optimizer and a finite-difference checker.

mod dense;
mod gradcheck;
mod gru;
mod loss;
mod matrix;
mod optim;
mod params;

pub use dense::{Activation, DenseParams};
pub use gradcheck::{finite_diff_coords, finite_diff_grad, relative_error};
pub use gru::{GruParams, GruStepCache, GruTrace};
pub use loss::{mae_grad, mae_loss};
pub(crate) use loss::{mae_grad_slices, mae_slices};
pub use matrix::{dot, Matrix};
pub use optim::{LrSchedule, NadamConfig, OptimizerState};
pub use params::{Parameters, TensorMut, TensorRef};
pub(crate) use params::join as params_join;
