//! Hierarchical sequence-to-sequences autoencoder: one latent code per
//! prefix, decoded back to a full window.

mod config;
mod mask;
mod model;
mod train;

pub use config::{ArchConfig, E2eTarget, TrainConfig, Variant};
pub use mask::{mask_for_classification, MaskKind};
pub use model::{build_targets, repeat_unit, LatentCode, ModelParams};
pub use train::{rng_for, train_autoencoder, TrainHistory, Trained};
