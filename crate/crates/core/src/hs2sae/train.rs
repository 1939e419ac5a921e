use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ArchConfig, TrainConfig};
use super::mask::mask_for_classification;
use super::model::ModelParams;
use crate::error::{Error, Result};
use crate::motiondata::window_sample;
use crate::ndmath::{Matrix, OptimizerState, Parameters};

const INIT_STREAM: u64 = 0;
const SAMPLE_STREAM: u64 = 1;
const VAL_STREAM: u64 = 2;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean batch loss of every optimizer update.
    pub step_loss: Vec<f64>,
    /// Held-out loss after each epoch; empty when validation is disabled.
    pub epoch_val_loss: Vec<f64>,
    /// Epoch whose rolling validation mean was lowest.
    pub best_epoch: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub params: ModelParams,
    pub history: TrainHistory,
}

/// ChaCha8 generator for `seed` on an independent `stream`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw<R: Rng>(data: &[Matrix], pool: &[usize], frames: usize, block: usize, rng: &mut R) -> Result<Matrix> {
    let seq = pool[rng.random_range(0..pool.len())];
    Ok(window_sample(&data[seq], frames, 1, block, rng)?.full)
}

/// Trains on uniformly sampled windows from `data`.
///
/// Sequences are split into `folds` folds by index; each epoch holds out the
/// next fold in turn and the returned parameters are those with the lowest
/// validation loss averaged over the last `folds` epochs. With fewer than two
/// folds or fewer eligible sequences than folds, every sequence is used for
/// training and the final parameters are returned.
pub fn train_autoencoder(data: &[Matrix], cfg: &ArchConfig, tc: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    tc.validate()?;
    if let Some(m) = data.iter().find(|m| m.cols() != cfg.features) {
        return Err(Error::shape(format!(
            "sequence has {} channels, model expects {}",
            m.cols(),
            cfg.features
        )));
    }
    let eligible: Vec<usize> = (0..data.len()).filter(|&i| data[i].rows() >= cfg.frames).collect();
    if eligible.is_empty() {
        return Err(Error::Data(format!("no sequence has at least {} frames", cfg.frames)));
    }
    let mut params = ModelParams::init(cfg, &mut rng_for(tc.seed, INIT_STREAM));
    let mut history = TrainHistory::default();
    if tc.epochs == 0 || tc.max_steps == Some(0) {
        return Ok(Trained { params, history });
    }

    let folds = if tc.folds >= 2 && eligible.len() >= tc.folds { tc.folds } else { 1 };
    let mut sample_rng = rng_for(tc.seed, SAMPLE_STREAM);
    let mut val_rng = rng_for(tc.seed, VAL_STREAM);
    let mut opt = OptimizerState::new(tc.nadam(), params.param_count());
    let mut flat = params.flatten();
    let mut best: Option<(f64, ModelParams)> = None;
    let updates_per_epoch = tc.samples_per_epoch.div_ceil(tc.batch);

    'epochs: for epoch in 0..tc.epochs {
        let held = epoch % folds;
        let (train_pool, val_pool): (Vec<usize>, Vec<usize>) = if folds > 1 {
            eligible.iter().partition(|&&i| i % folds != held)
        } else {
            (eligible.clone(), Vec::new())
        };
        for _ in 0..updates_per_epoch {
            if tc.max_steps.is_some_and(|m| opt.step >= m) {
                break 'epochs;
            }
            let mut windows = Vec::with_capacity(tc.batch);
            for _ in 0..tc.batch {
                windows.push(draw(data, &train_pool, cfg.frames, cfg.block, &mut sample_rng)?);
            }
            let batch: Vec<(Matrix, Matrix)> = match tc.label_mask_channels {
                Some(k) => mask_for_classification(&windows, k, &mut sample_rng)?
                    .into_iter()
                    .zip(windows)
                    .map(|((input, _), full)| (input, full))
                    .collect(),
                None => windows.into_iter().map(|w| (w.clone(), w)).collect(),
            };
            let (loss, grad) = params.batch_loss_and_grad(cfg, &batch)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite { count: 1, first: opt.step as usize });
            }
            opt.nadam_step(&mut flat, &grad.flatten())?;
            params.assign(&flat);
            history.step_loss.push(loss);
        }
        if folds > 1 {
            let mut total = 0.0;
            let n = tc.val_samples.max(1);
            for _ in 0..n {
                let w = draw(data, &val_pool, cfg.frames, cfg.block, &mut val_rng)?;
                total += params.multi_loss(cfg, &w)?;
            }
            history.epoch_val_loss.push(total / n as f64);
            let recent = &history.epoch_val_loss[history.epoch_val_loss.len().saturating_sub(folds)..];
            let rolling = recent.iter().sum::<f64>() / recent.len() as f64;
            if best.as_ref().is_none_or(|(b, _)| rolling < *b) {
                best = Some((rolling, params.clone()));
                history.best_epoch = Some(epoch);
            }
        }
    }
    if let Some((_, p)) = best {
        params = p;
    }
    Ok(Trained { params, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hs2sae::Variant;
    use crate::motiondata::{synth_dataset, SynthFamily};
    use crate::ndmath::Activation;

    fn setup() -> (Vec<Matrix>, ArchConfig, TrainConfig) {
        let data: Vec<Matrix> = synth_dataset(&[SynthFamily::SineWalk], 6, 4, 40, 3)
            .unwrap()
            .into_iter()
            .map(|s| s.frames)
            .collect();
        let cfg = ArchConfig {
            frames: 8,
            block: 2,
            latent: 6,
            features: 4,
            sub_hidden: 6,
            dec_hidden: 6,
            activation: Activation::Tanh,
            variant: Variant::Hs2sae,
        };
        let tc = TrainConfig {
            batch: 4,
            epochs: 3,
            samples_per_epoch: 12,
            folds: 3,
            val_samples: 4,
            ..TrainConfig::default()
        };
        (data, cfg, tc)
    }

    #[test]
    fn deterministic_for_seed() {
        let (data, cfg, tc) = setup();
        let a = train_autoencoder(&data, &cfg, &tc).unwrap();
        let b = train_autoencoder(&data, &cfg, &tc).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.params, b.params);
        assert_eq!(a.history.step_loss.len(), 9);
        assert_eq!(a.history.epoch_val_loss.len(), 3);
        let c = train_autoencoder(&data, &cfg, &TrainConfig { seed: 1, ..tc }).unwrap();
        assert_ne!(a.history.step_loss, c.history.step_loss);
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (data, cfg, tc) = setup();
        let t = train_autoencoder(&data, &cfg, &TrainConfig { epochs: 0, ..tc.clone() }).unwrap();
        assert!(t.history.step_loss.is_empty());
        assert_eq!(t.params, ModelParams::init(&cfg, &mut rng_for(tc.seed, INIT_STREAM)));
    }

    #[test]
    fn max_steps_stops_mid_epoch() {
        let (data, cfg, tc) = setup();
        let t = train_autoencoder(&data, &cfg, &TrainConfig { max_steps: Some(4), folds: 1, ..tc }).unwrap();
        assert_eq!(t.history.step_loss.len(), 4);
        assert!(t.history.epoch_val_loss.is_empty());
        assert_eq!(t.history.best_epoch, None);
    }

    #[test]
    fn rejects_short_data() {
        let (_, cfg, tc) = setup();
        let short = vec![Matrix::zeros(5, 4)];
        assert!(matches!(train_autoencoder(&short, &cfg, &tc), Err(Error::Data(_))));
    }
}
