use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndmath::{Activation, LrSchedule, NadamConfig};

/// What the end-to-end baseline is trained to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum E2eTarget {
    /// X → Y: only frames after the prefix are scored.
    Suffix,
    /// X → XY: the whole window is scored.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    /// One latent code per prefix, zero placeholders, multi-prefix loss.
    Hs2sae,
    /// Pads with the last observed frame and reads the final encoder state.
    BasicPad,
    /// Same network trained end to end from a fixed prefix length.
    HSeq2Seq { prefix_blocks: usize, target: E2eTarget },
}

impl Variant {
    pub fn name(&self) -> String {
        match self {
            Variant::Hs2sae => "hs2sae".into(),
            Variant::BasicPad => "basic_pad".into(),
            Variant::HSeq2Seq { target: E2eTarget::Suffix, .. } => "h_seq2seq_suffix".into(),
            Variant::HSeq2Seq { target: E2eTarget::Full, .. } => "h_seq2seq_full".into(),
        }
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchConfig {
    /// Window length `T` in frames.
    pub frames: usize,
    /// Block length `τ`; must divide `frames`.
    pub block: usize,
    /// Latent dimension `n` (hidden size of the higher-level encoder).
    pub latent: usize,
    /// Feature channels `d` per frame (pose plus any label channels).
    pub features: usize,
    pub sub_hidden: usize,
    pub dec_hidden: usize,
    /// Candidate/readout activation for every layer except the higher encoder,
    /// which always uses `tanh`.
    pub activation: Activation,
    pub variant: Variant,
}

impl ArchConfig {
    pub fn blocks(&self) -> usize {
        self.frames / self.block
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("frames", self.frames),
            ("block", self.block),
            ("latent", self.latent),
            ("features", self.features),
            ("sub_hidden", self.sub_hidden),
            ("dec_hidden", self.dec_hidden),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !self.frames.is_multiple_of(self.block) {
            return Err(Error::Config(format!(
                "block {} does not divide frames {}",
                self.block, self.frames
            )));
        }
        if let Variant::HSeq2Seq { prefix_blocks, target } = self.variant {
            let max = match target {
                E2eTarget::Suffix => self.blocks() - 1,
                E2eTarget::Full => self.blocks(),
            };
            if prefix_blocks == 0 || prefix_blocks > max {
                return Err(Error::Config(format!(
                    "end-to-end prefix of {prefix_blocks} blocks outside 1..={max}"
                )));
            }
        }
        Ok(())
    }
}

/// Optimisation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr0: f64,
    /// Inverse-time learning-rate decay per update.
    pub decay: f64,
    pub batch: usize,
    pub epochs: usize,
    pub samples_per_epoch: usize,
    pub folds: usize,
    pub seed: u64,
    /// Stop after this many optimizer updates, mid-epoch if necessary.
    pub max_steps: Option<u64>,
    /// Windows drawn from the held-out fold per epoch.
    pub val_samples: usize,
    /// When set, the last `k` channels are labels and batches are masked in thirds.
    pub label_mask_channels: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr0: 8e-4,
            decay: 4e-3,
            batch: 64,
            epochs: 300,
            samples_per_epoch: 10_000,
            folds: 5,
            seed: 0,
            max_steps: None,
            val_samples: 256,
            label_mask_channels: None,
        }
    }
}

impl TrainConfig {
    pub fn nadam(&self) -> NadamConfig {
        NadamConfig::new(self.lr0, LrSchedule::InverseTime { decay: self.decay })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0) || self.decay < 0.0 {
            return Err(Error::Config("lr0 must be positive and decay non-negative".into()));
        }
        if self.batch == 0 || self.samples_per_epoch == 0 {
            return Err(Error::Config("batch and samples_per_epoch must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ArchConfig {
        ArchConfig {
            frames: 8,
            block: 2,
            latent: 4,
            features: 3,
            sub_hidden: 4,
            dec_hidden: 4,
            activation: Activation::Tanh,
            variant: Variant::Hs2sae,
        }
    }

    #[test]
    fn block_must_divide() {
        assert!(cfg().validate().is_ok());
        let mut c = cfg();
        c.block = 3;
        assert!(c.validate().is_err());
        c.block = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn e2e_prefix_range() {
        let mut c = cfg();
        c.variant = Variant::HSeq2Seq { prefix_blocks: 4, target: E2eTarget::Suffix };
        assert!(c.validate().is_err());
        c.variant = Variant::HSeq2Seq { prefix_blocks: 4, target: E2eTarget::Full };
        assert!(c.validate().is_ok());
    }

    #[test]
    fn default_hyperparameters() {
        let t = TrainConfig::default();
        assert_eq!((t.lr0, t.decay, t.batch, t.folds, t.samples_per_epoch), (8e-4, 4e-3, 64, 5, 10_000));
    }
}
