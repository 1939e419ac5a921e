//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The page trains a small autoencoder on the two synthetic motion families,
//! then completes held-out walk/sit prefixes and interpolates between them.

use hs2s::completion::{compute_vj, interpolate, predict_full, Completer, CompletionMode, CompletionVector};
use hs2s::evalbench::{draw_windows, zero_velocity_predict};
use hs2s::hs2sae::{train_autoencoder, ArchConfig, ModelParams, TrainConfig, Variant};
use hs2s::motiondata::{compute_norm_stats, synth_dataset, NormScheme, SynthFamily, DEFAULT_IGNORE_THRESHOLD};
use hs2s::ndmath::{Activation, Matrix};
use hs2s::{Error, Result};
use serde_json::json;
use wasm_bindgen::prelude::*;

const CHANNELS: usize = 6;
const PREFIX_BLOCKS: usize = 2;

fn arch() -> ArchConfig {
    ArchConfig {
        frames: 20,
        block: 5,
        latent: 16,
        features: CHANNELS,
        sub_hidden: 24,
        dec_hidden: 24,
        activation: Activation::Tanh,
        variant: Variant::Hs2sae,
    }
}

/// Normalized training and held-out sequences of one family.
struct Family {
    train: Vec<Matrix>,
    test: Vec<Matrix>,
}

pub struct Demo {
    cfg: ArchConfig,
    walk: Family,
    sit: Family,
    params: ModelParams,
    completer: Option<CompletionVector>,
    losses: Vec<f64>,
    seed: u64,
}

impl Demo {
    pub fn new(seed: u64) -> Result<Self> {
        let cfg = arch();
        let fams = [SynthFamily::SineWalk, SynthFamily::SineSit];
        let train = synth_dataset(&fams, 4, CHANNELS, 120, seed)?;
        let test = synth_dataset(&fams, 2, CHANNELS, 120, seed.wrapping_add(1))?;
        let stats = compute_norm_stats(&train, NormScheme::UnitRange, DEFAULT_IGNORE_THRESHOLD)?;
        let norm = |s: &[hs2s::motiondata::MotionSequence]| -> Result<Vec<Matrix>> {
            s.iter().map(|q| stats.forward(&q.frames)).collect()
        };
        let (tw, ts) = train.split_at(4);
        let (vw, vs) = test.split_at(2);
        let mut rng = hs2s::hs2sae::rng_for(seed, 0);
        Ok(Self {
            cfg,
            walk: Family { train: norm(tw)?, test: norm(vw)? },
            sit: Family { train: norm(ts)?, test: norm(vs)? },
            params: ModelParams::init(&cfg, &mut rng),
            completer: None,
            losses: Vec::new(),
            seed,
        })
    }

    fn family(&self, name: &str) -> Result<&Family> {
        match name {
            "walk" | "sine_walk" => Ok(&self.walk),
            "sit" | "sine_sit" => Ok(&self.sit),
            other => Err(Error::Argument(format!("unknown family `{other}`"))),
        }
    }

    /// Retrains from scratch for `steps` updates and refits the completion vector.
    pub fn train(&mut self, steps: u64) -> Result<&[f64]> {
        let data: Vec<Matrix> = self.walk.train.iter().chain(&self.sit.train).cloned().collect();
        let tc = TrainConfig {
            lr0: 1e-2,
            decay: 1e-3,
            batch: 16,
            epochs: usize::MAX,
            samples_per_epoch: 160,
            folds: 1,
            seed: self.seed,
            max_steps: Some(steps),
            val_samples: 16,
            label_mask_channels: None,
        };
        let trained = train_autoencoder(&data, &self.cfg, &tc)?;
        self.params = trained.params;
        self.losses = trained.history.step_loss;
        let pairs = draw_windows(&data, &self.cfg, PREFIX_BLOCKS, 200, self.seed, 5)?;
        self.completer = Some(compute_vj(&self.params, &self.cfg, &pairs, PREFIX_BLOCKS, CompletionMode::Completion)?);
        Ok(&self.losses)
    }

    /// Truth, completion and zero-velocity prediction for one held-out window.
    pub fn complete(&self, family: &str, index: usize) -> Result<serde_json::Value> {
        let cv = self
            .completer
            .clone()
            .ok_or_else(|| Error::Argument("train the model first".into()))?;
        let seqs = &self.family(family)?.test;
        let windows = draw_windows(seqs, &self.cfg, PREFIX_BLOCKS, index + 1, self.seed, 6)?;
        let w = &windows[index];
        let completion = predict_full(&self.params, &self.cfg, &Completer::Add(cv), &w.x)?;
        let mut zv = w.x.clone();
        for row in zero_velocity_predict(&w.x, w.y.rows())?.row_iter() {
            zv.push_row(row)?;
        }
        Ok(json!({
            "prefix_len": w.x.rows(),
            "truth": w.full.to_rows(),
            "completion": completion.to_rows(),
            "zero_velocity": zv.to_rows(),
        }))
    }

    /// Decodes `steps + 1` codes between a walk window and a sit window.
    pub fn interpolate(&self, steps: usize) -> Result<serde_json::Value> {
        let pick = |f: &Family| -> Result<Matrix> { Ok(f.test[0].slice_rows(0, self.cfg.frames)) };
        let za = self.params.encode_prefix(&self.cfg, &pick(&self.walk)?)?;
        let zb = self.params.encode_prefix(&self.cfg, &pick(&self.sit)?)?;
        let seqs = interpolate(&self.params, &self.cfg, &za, &zb, steps)?;
        Ok(json!({ "sequences": seqs.iter().map(Matrix::to_rows).collect::<Vec<_>>() }))
    }
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// JavaScript handle around [`Demo`].
#[wasm_bindgen]
pub struct MotionDemo {
    inner: Demo,
}

#[wasm_bindgen]
impl MotionDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> std::result::Result<MotionDemo, JsError> {
        Ok(Self { inner: Demo::new(seed as u64).map_err(js)? })
    }

    /// Per-step training losses.
    pub fn train(&mut self, steps: u32) -> std::result::Result<Vec<f64>, JsError> {
        self.inner.train(steps as u64).map(<[f64]>::to_vec).map_err(js)
    }

    /// JSON with `truth`, `completion` and `zero_velocity` frame arrays.
    pub fn complete(&self, family: &str, index: u32) -> std::result::Result<String, JsError> {
        self.inner.complete(family, index as usize).map(|v| v.to_string()).map_err(js)
    }

    /// JSON with `sequences`, from walk to sit.
    pub fn interpolate(&self, steps: u32) -> std::result::Result<String, JsError> {
        self.inner.interpolate(steps as usize).map(|v| v.to_string()).map_err(js)
    }
}
