//! Plain-text run configuration: `key = value` lines, `#` comments.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::bundle::variant_from_name;
use crate::completion::FnTrainConfig;
use crate::error::{Error, Result};
use crate::evalbench::AblationConfig;
use crate::hs2sae::{ArchConfig, TrainConfig, Variant};
use crate::motiondata::{NormScheme, SynthFamily, H36M_ACTIONS};
use crate::ndmath::Activation;

pub const DATA_DIR_ENV: &str = "HS2S_DATA_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `synthetic` or `h36m`.
    pub dataset: String,
    /// Raw dataset root; empty means `$HS2S_DATA_DIR`.
    pub data_dir: String,
    pub train_subjects: Vec<u32>,
    pub test_subjects: Vec<u32>,
    pub actions: Vec<String>,
    pub labels: bool,
    pub norm: NormScheme,
    pub downsample: usize,
    pub synthetic_families: Vec<SynthFamily>,
    pub synthetic_count: usize,
    pub synthetic_test_count: usize,
    pub synthetic_channels: usize,
    pub synthetic_length: usize,

    pub frames: usize,
    pub block: usize,
    pub latent: usize,
    pub sub_hidden: usize,
    pub dec_hidden: usize,
    pub activation: Activation,
    pub variant: String,
    pub prefix_blocks: usize,

    pub lr0: f64,
    pub decay: f64,
    pub batch: usize,
    pub epochs: usize,
    pub samples_per_epoch: usize,
    pub folds: usize,
    pub max_steps: Option<u64>,
    pub val_samples: usize,

    pub j: usize,
    pub pair_windows: usize,
    pub fn_lr0: f64,
    pub fn_epochs: usize,
    pub fn_batch: usize,
    pub fn_decay_rate: f64,
    pub fn_decay_every: usize,

    pub input_frames: usize,
    pub output_frames: usize,
    pub test_windows: usize,
    pub noise_scale: f64,

    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: "synthetic".into(),
            data_dir: String::new(),
            train_subjects: vec![1, 6, 7, 8, 9, 11],
            test_subjects: vec![5],
            actions: H36M_ACTIONS.iter().map(|s| s.to_string()).collect(),
            labels: false,
            norm: NormScheme::Zscore,
            downsample: 2,
            synthetic_families: SynthFamily::ALL.to_vec(),
            synthetic_count: 20,
            synthetic_test_count: 5,
            synthetic_channels: 8,
            synthetic_length: 200,
            frames: 20,
            block: 5,
            latent: 32,
            sub_hidden: 32,
            dec_hidden: 32,
            activation: Activation::Tanh,
            variant: "hs2sae".into(),
            prefix_blocks: 2,
            lr0: 8e-4,
            decay: 4e-3,
            batch: 64,
            epochs: 300,
            samples_per_epoch: 10_000,
            folds: 5,
            max_steps: None,
            val_samples: 256,
            j: 2,
            pair_windows: 1000,
            fn_lr0: 1e-3,
            fn_epochs: 50,
            fn_batch: 32,
            fn_decay_rate: 0.5,
            fn_decay_every: 10,
            input_frames: 50,
            output_frames: 10,
            test_windows: 256,
            noise_scale: 1.0,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse {v:?}")))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s.trim_start_matches('S')))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "dataset" => {
                if v != "synthetic" && v != "h36m" {
                    return Err(Error::Config(format!("dataset must be synthetic or h36m, got {v:?}")));
                }
                self.dataset = v.into()
            }
            "data_dir" => self.data_dir = v.into(),
            "train_subjects" => self.train_subjects = list(key, v)?,
            "test_subjects" => self.test_subjects = list(key, v)?,
            "actions" => {
                self.actions = if v == "all" {
                    H36M_ACTIONS.iter().map(|s| s.to_string()).collect()
                } else {
                    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
                }
            }
            "labels" => self.labels = parse(key, v)?,
            "norm" => self.norm = parse(key, v)?,
            "downsample" => self.downsample = parse(key, v)?,
            "synthetic_families" => self.synthetic_families = list(key, v)?,
            "synthetic_count" => self.synthetic_count = parse(key, v)?,
            "synthetic_test_count" => self.synthetic_test_count = parse(key, v)?,
            "synthetic_channels" => self.synthetic_channels = parse(key, v)?,
            "synthetic_length" => self.synthetic_length = parse(key, v)?,
            "frames" => self.frames = parse(key, v)?,
            "block" => self.block = parse(key, v)?,
            "latent" => self.latent = parse(key, v)?,
            "sub_hidden" => self.sub_hidden = parse(key, v)?,
            "dec_hidden" => self.dec_hidden = parse(key, v)?,
            "activation" => self.activation = parse(key, v)?,
            "variant" => {
                variant_from_name(v, 1)?;
                self.variant = v.into()
            }
            "prefix_blocks" => self.prefix_blocks = parse(key, v)?,
            "lr0" => self.lr0 = parse(key, v)?,
            "decay" => self.decay = parse(key, v)?,
            "batch" => self.batch = parse(key, v)?,
            "epochs" => self.epochs = parse(key, v)?,
            "samples_per_epoch" => self.samples_per_epoch = parse(key, v)?,
            "folds" => self.folds = parse(key, v)?,
            "max_steps" => self.max_steps = if v == "none" { None } else { Some(parse(key, v)?) },
            "val_samples" => self.val_samples = parse(key, v)?,
            "j" => self.j = parse(key, v)?,
            "pair_windows" => self.pair_windows = parse(key, v)?,
            "fn_lr0" => self.fn_lr0 = parse(key, v)?,
            "fn_epochs" => self.fn_epochs = parse(key, v)?,
            "fn_batch" => self.fn_batch = parse(key, v)?,
            "fn_decay_rate" => self.fn_decay_rate = parse(key, v)?,
            "fn_decay_every" => self.fn_decay_every = parse(key, v)?,
            "input_frames" => self.input_frames = parse(key, v)?,
            "output_frames" => self.output_frames = parse(key, v)?,
            "test_windows" => self.test_windows = parse(key, v)?,
            "noise_scale" => self.noise_scale = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_text(&fs::read_to_string(path)?)
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("dataset", self.dataset.clone());
        kv("data_dir", self.data_dir.clone());
        kv("train_subjects", join(&self.train_subjects));
        kv("test_subjects", join(&self.test_subjects));
        kv("actions", self.actions.join(","));
        kv("labels", self.labels.to_string());
        kv("norm", self.norm.as_str().into());
        kv("downsample", self.downsample.to_string());
        kv("synthetic_families", self.synthetic_families.iter().map(|f| f.name()).collect::<Vec<_>>().join(","));
        kv("synthetic_count", self.synthetic_count.to_string());
        kv("synthetic_test_count", self.synthetic_test_count.to_string());
        kv("synthetic_channels", self.synthetic_channels.to_string());
        kv("synthetic_length", self.synthetic_length.to_string());
        kv("frames", self.frames.to_string());
        kv("block", self.block.to_string());
        kv("latent", self.latent.to_string());
        kv("sub_hidden", self.sub_hidden.to_string());
        kv("dec_hidden", self.dec_hidden.to_string());
        kv("activation", self.activation.as_str().into());
        kv("variant", self.variant.clone());
        kv("prefix_blocks", self.prefix_blocks.to_string());
        kv("lr0", format!("{:?}", self.lr0));
        kv("decay", format!("{:?}", self.decay));
        kv("batch", self.batch.to_string());
        kv("epochs", self.epochs.to_string());
        kv("samples_per_epoch", self.samples_per_epoch.to_string());
        kv("folds", self.folds.to_string());
        kv("max_steps", self.max_steps.map_or("none".into(), |m| m.to_string()));
        kv("val_samples", self.val_samples.to_string());
        kv("j", self.j.to_string());
        kv("pair_windows", self.pair_windows.to_string());
        kv("fn_lr0", format!("{:?}", self.fn_lr0));
        kv("fn_epochs", self.fn_epochs.to_string());
        kv("fn_batch", self.fn_batch.to_string());
        kv("fn_decay_rate", format!("{:?}", self.fn_decay_rate));
        kv("fn_decay_every", self.fn_decay_every.to_string());
        kv("input_frames", self.input_frames.to_string());
        kv("output_frames", self.output_frames.to_string());
        kv("test_windows", self.test_windows.to_string());
        kv("noise_scale", format!("{:?}", self.noise_scale));
        kv("seed", self.seed.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        s
    }

    /// Dataset root from the config or the environment.
    pub fn resolve_data_dir(&self) -> Result<PathBuf> {
        if !self.data_dir.is_empty() {
            return Ok(PathBuf::from(&self.data_dir));
        }
        std::env::var_os(DATA_DIR_ENV)
            .map(PathBuf::from)
            .ok_or_else(|| Error::Config(format!("no data_dir configured and ${DATA_DIR_ENV} is unset")))
    }

    pub fn variant(&self) -> Result<Variant> {
        variant_from_name(&self.variant, self.prefix_blocks)
    }

    /// Architecture for `features` channels per frame.
    pub fn arch(&self, features: usize) -> Result<ArchConfig> {
        let a = ArchConfig {
            frames: self.frames,
            block: self.block,
            latent: self.latent,
            features,
            sub_hidden: self.sub_hidden,
            dec_hidden: self.dec_hidden,
            activation: self.activation,
            variant: self.variant()?,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            lr0: self.lr0,
            decay: self.decay,
            batch: self.batch,
            epochs: self.epochs,
            samples_per_epoch: self.samples_per_epoch,
            folds: self.folds,
            seed: self.seed,
            max_steps: self.max_steps,
            val_samples: self.val_samples,
            label_mask_channels: None,
        }
    }

    pub fn fn_train(&self) -> FnTrainConfig {
        FnTrainConfig {
            lr0: self.fn_lr0,
            epochs: self.fn_epochs,
            batch: self.fn_batch,
            decay_rate: self.fn_decay_rate,
            decay_every: self.fn_decay_every,
            seed: self.seed,
        }
    }

    pub fn ablation(&self) -> AblationConfig {
        let suffix = self.frames.saturating_sub(self.j * self.block);
        let mut horizons: Vec<usize> = [2, 4, 8, 10].into_iter().filter(|&h| h <= suffix).collect();
        if horizons.is_empty() {
            horizons = (1..=suffix).collect();
        }
        AblationConfig {
            j: self.j,
            pair_windows: self.pair_windows,
            test_windows: self.test_windows,
            horizon_frames: horizons,
            fn_train: self.fn_train(),
        }
    }
}
