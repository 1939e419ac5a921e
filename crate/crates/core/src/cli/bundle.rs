//! Typed artifacts (dataset, model, completer) stored in the container format.

use std::path::Path;

use super::checkpoint::{join_f64, split_f64, Block, Container};
use crate::completion::{Completer, CompletionMode, CompletionVector, FnCompleter};
use crate::error::{Error, Result};
use crate::hs2sae::{ArchConfig, E2eTarget, ModelParams, Variant};
use crate::motiondata::{LabelVocab, NormScheme, NormStats};
use crate::ndmath::{Activation, DenseParams, Matrix};

fn expect_kind(c: &Container, kind: &str) -> Result<()> {
    match c.get("kind") {
        Some(k) if k == kind => Ok(()),
        other => Err(Error::Structure(format!("expected a {kind} artifact, found {other:?}"))),
    }
}

pub fn variant_from_name(name: &str, prefix_blocks: usize) -> Result<Variant> {
    match name {
        "hs2sae" => Ok(Variant::Hs2sae),
        "basic_pad" => Ok(Variant::BasicPad),
        "h_seq2seq_suffix" => Ok(Variant::HSeq2Seq { prefix_blocks, target: E2eTarget::Suffix }),
        "h_seq2seq_full" => Ok(Variant::HSeq2Seq { prefix_blocks, target: E2eTarget::Full }),
        other => Err(Error::Config(format!("unknown variant `{other}`"))),
    }
}

fn put_arch(c: &mut Container, a: &ArchConfig) {
    c.set("arch.frames", a.frames);
    c.set("arch.block", a.block);
    c.set("arch.latent", a.latent);
    c.set("arch.features", a.features);
    c.set("arch.sub_hidden", a.sub_hidden);
    c.set("arch.dec_hidden", a.dec_hidden);
    c.set("arch.activation", a.activation.as_str());
    c.set("arch.variant", a.variant.name());
    let pb = match a.variant {
        Variant::HSeq2Seq { prefix_blocks, .. } => prefix_blocks,
        _ => 0,
    };
    c.set("arch.prefix_blocks", pb);
}

fn get_arch(c: &Container) -> Result<ArchConfig> {
    let activation: Activation = c
        .require("arch.activation")?
        .parse()
        .map_err(|_| Error::Structure("invalid arch.activation".into()))?;
    let a = ArchConfig {
        frames: c.parse("arch.frames")?,
        block: c.parse("arch.block")?,
        latent: c.parse("arch.latent")?,
        features: c.parse("arch.features")?,
        sub_hidden: c.parse("arch.sub_hidden")?,
        dec_hidden: c.parse("arch.dec_hidden")?,
        activation,
        variant: variant_from_name(c.require("arch.variant")?, c.parse("arch.prefix_blocks")?)?,
    };
    a.validate().map_err(|e| Error::Structure(e.to_string()))?;
    Ok(a)
}

fn put_stats(c: &mut Container, s: &NormStats) {
    c.set("norm.scheme", s.scheme.as_str());
    c.set("norm.mean", join_f64(&s.mean));
    c.set("norm.std", join_f64(&s.std));
    c.set("norm.min", join_f64(&s.min));
    c.set("norm.max", join_f64(&s.max));
    let keep: String = s.keep_mask.iter().map(|&k| if k { '1' } else { '0' }).collect();
    c.set("norm.keep", keep);
}

fn get_stats(c: &Container) -> Result<Option<NormStats>> {
    let Some(scheme) = c.get("norm.scheme") else {
        return Ok(None);
    };
    let scheme: NormScheme = scheme
        .parse()
        .map_err(|_| Error::Structure("invalid norm.scheme".into()))?;
    let s = NormStats {
        mean: split_f64(c.require("norm.mean")?)?,
        std: split_f64(c.require("norm.std")?)?,
        min: split_f64(c.require("norm.min")?)?,
        max: split_f64(c.require("norm.max")?)?,
        keep_mask: c.require("norm.keep")?.chars().map(|ch| ch == '1').collect(),
        scheme,
    };
    let n = s.mean.len();
    if [s.std.len(), s.min.len(), s.max.len(), s.keep_mask.len()].iter().any(|&l| l != n) {
        return Err(Error::Structure("normalization fields differ in length".into()));
    }
    Ok(Some(s))
}

fn put_vocab(c: &mut Container, v: &Option<LabelVocab>) {
    if let Some(v) = v {
        c.set("labels", v.names().join(","));
    }
}

fn get_vocab(c: &Container) -> Result<Option<LabelVocab>> {
    c.get("labels")
        .map(|s| LabelVocab::new(&s.split(',').collect::<Vec<_>>()))
        .transpose()
}

/// Preprocessed sequences plus the statistics used to normalize them.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetArtifact {
    pub stats: NormStats,
    /// Present when frames carry appended label channels.
    pub vocab: Option<LabelVocab>,
    pub fps: f64,
    /// `synthetic` or the raw dataset root.
    pub source: String,
    pub test_subjects: Vec<u32>,
    pub train: Vec<(String, Matrix)>,
    pub test: Vec<(String, Matrix)>,
}

impl DatasetArtifact {
    pub fn label_channels(&self) -> usize {
        self.vocab.as_ref().map_or(0, LabelVocab::len)
    }

    pub fn to_container(&self) -> Container {
        let mut c = Container::default();
        c.set("kind", "dataset");
        c.set("fps", format!("{:?}", self.fps));
        c.set("source", &self.source);
        c.set(
            "test_subjects",
            self.test_subjects.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
        );
        put_stats(&mut c, &self.stats);
        put_vocab(&mut c, &self.vocab);
        for (split, seqs) in [("train", &self.train), ("test", &self.test)] {
            for (key, m) in seqs {
                c.push_block(Block::new(format!("dataset/{split}/{key}"), vec![m.rows(), m.cols()], m.data()));
            }
        }
        c
    }

    pub fn from_container(c: &Container) -> Result<Self> {
        expect_kind(c, "dataset")?;
        let stats = get_stats(c)?.ok_or_else(|| Error::Structure("dataset lacks normalization stats".into()))?;
        let read = |split: &str| -> Result<Vec<(String, Matrix)>> {
            let prefix = format!("dataset/{split}/");
            c.section(&prefix)
                .map(|b| Ok((b.name[prefix.len()..].to_string(), b.to_matrix()?)))
                .collect()
        };
        let test_subjects = c
            .get("test_subjects")
            .unwrap_or("")
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| Error::Structure(format!("invalid subject {s:?}"))))
            .collect::<Result<_>>()?;
        Ok(Self {
            stats,
            vocab: get_vocab(c)?,
            fps: c.parse("fps")?,
            source: c.require("source")?.to_string(),
            test_subjects,
            train: read("train")?,
            test: read("test")?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_container().save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_container(&Container::load(path)?)
    }
}

/// Trained weights bundled with the preprocessing they expect.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub arch: ArchConfig,
    pub params: ModelParams,
    pub stats: Option<NormStats>,
    pub vocab: Option<LabelVocab>,
}

impl ModelArtifact {
    pub fn label_channels(&self) -> usize {
        self.vocab.as_ref().map_or(0, LabelVocab::len)
    }

    pub fn to_container(&self) -> Container {
        let mut c = Container::default();
        c.set("kind", "model");
        put_arch(&mut c, &self.arch);
        if let Some(s) = &self.stats {
            put_stats(&mut c, s);
        }
        put_vocab(&mut c, &self.vocab);
        c.push_params("model", &self.params);
        c
    }

    pub fn from_container(c: &Container) -> Result<Self> {
        expect_kind(c, "model")?;
        let arch = get_arch(c)?;
        let mut params = ModelParams::zeros(&arch);
        c.read_params("model", &mut params)?;
        Ok(Self {
            arch,
            params,
            stats: get_stats(c)?,
            vocab: get_vocab(c)?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_container().save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_container(&Container::load(path)?)
    }
}

fn vec_block(name: &str, v: &[f64]) -> Block {
    Block::new(name, vec![v.len()], v)
}

pub fn completer_to_container(completer: &Completer) -> Container {
    let mut c = Container::default();
    c.set("kind", "completer");
    c.set("completer.mode", completer.mode().as_str());
    c.set("completer.prefix_len", completer.prefix_len());
    c.set("completer.target_len", completer.target_len());
    match completer {
        Completer::Add(cv) => {
            c.set("completer.type", "add");
            c.set("completer.j", cv.j);
            c.set("completer.sample_count", cv.sample_count);
            c.push_block(vec_block("completion/v", &cv.v));
            c.push_block(vec_block("completion/sigma", &cv.sigma));
        }
        Completer::Fn(f) => {
            c.set("completer.type", "fn");
            c.set("completer.j", f.trained_j);
            c.push_params("fn", &f.layer);
            if let Some(s) = &f.sigma {
                c.push_block(vec_block("fn/sigma", s));
            }
        }
    }
    c
}

pub fn completer_from_container(c: &Container) -> Result<Completer> {
    expect_kind(c, "completer")?;
    let mode: CompletionMode = c
        .require("completer.mode")?
        .parse()
        .map_err(|_| Error::Structure("invalid completer.mode".into()))?;
    let j: usize = c.parse("completer.j")?;
    let prefix_len = c.parse("completer.prefix_len")?;
    let target_len = c.parse("completer.target_len")?;
    match c.require("completer.type")? {
        "add" => {
            let v = c.block("completion/v")?.to_f64();
            let sigma = c.block("completion/sigma")?.to_f64();
            if sigma.len() != v.len() {
                return Err(Error::Structure("completion v and sigma differ in length".into()));
            }
            Ok(Completer::Add(CompletionVector {
                j,
                mode,
                prefix_len,
                target_len,
                v,
                sigma,
                sample_count: c.parse("completer.sample_count")?,
            }))
        }
        "fn" => {
            let n = c.block("fn/bias")?.values.len();
            let mut layer = DenseParams::zeros(n, n, Activation::Linear);
            c.read_params("fn", &mut layer)?;
            let sigma = c.has_block("fn/sigma").then(|| c.block("fn/sigma").map(Block::to_f64)).transpose()?;
            Ok(Completer::Fn(FnCompleter {
                layer,
                trained_j: j,
                mode,
                prefix_len,
                target_len,
                sigma,
            }))
        }
        other => Err(Error::Structure(format!("unknown completer type `{other}`"))),
    }
}

pub fn save_completer(path: impl AsRef<Path>, completer: &Completer) -> Result<()> {
    completer_to_container(completer).save(path)
}

pub fn load_completer(path: impl AsRef<Path>) -> Result<Completer> {
    completer_from_container(&Container::load(path)?)
}
