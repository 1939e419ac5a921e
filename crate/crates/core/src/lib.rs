//! Hierarchical sequence-to-sequences autoencoder (H-Seq2SeqsAE) for skeleton
//! motion, with latent-space pattern completion, evaluation protocols and
//! checkpoint persistence.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod completion;
pub mod error;
pub mod evalbench;
pub mod hs2sae;
pub mod motiondata;
pub mod ndmath;

pub use error::{Error, Result};
