use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::add::{complete_add, CompletionMode, CompletionVector, PatternPairSet};
use super::fnmap::FnCompleter;
use crate::error::{Error, Result};
use crate::hs2sae::{ArchConfig, LatentCode, ModelParams};
use crate::ndmath::Matrix;

/// Either latent completer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Completer {
    Add(CompletionVector),
    Fn(FnCompleter),
}

impl Completer {
    pub fn mode(&self) -> CompletionMode {
        match self {
            Completer::Add(c) => c.mode,
            Completer::Fn(f) => f.mode,
        }
    }

    pub fn prefix_len(&self) -> usize {
        match self {
            Completer::Add(c) => c.prefix_len,
            Completer::Fn(f) => f.prefix_len,
        }
    }

    pub fn target_len(&self) -> usize {
        match self {
            Completer::Add(c) => c.target_len,
            Completer::Fn(f) => f.target_len,
        }
    }

    pub fn sigma(&self) -> Option<&[f64]> {
        match self {
            Completer::Add(c) => Some(&c.sigma),
            Completer::Fn(f) => f.sigma.as_deref(),
        }
    }

    /// G: maps a prefix code to a target code.
    pub fn apply(&self, z: &LatentCode) -> Result<LatentCode> {
        match self {
            Completer::Add(c) => complete_add(z, c),
            Completer::Fn(f) => f.apply(z),
        }
    }
}

fn complete_code(params: &ModelParams, cfg: &ArchConfig, completer: &Completer, x: &Matrix) -> Result<LatentCode> {
    if x.rows() != completer.prefix_len() {
        return Err(Error::arg(format!(
            "prefix of {} frames, completer expects {}",
            x.rows(),
            completer.prefix_len()
        )));
    }
    completer.apply(&params.encode_prefix(cfg, x)?)
}

/// D(G(E(X))), all `T` frames.
pub fn predict_full(params: &ModelParams, cfg: &ArchConfig, completer: &Completer, x: &Matrix) -> Result<Matrix> {
    params.decode(cfg, &complete_code(params, cfg, completer, x)?)
}

/// The frames of a full prediction that continue the prefix.
///
/// Completion decodes the whole window, so the continuation starts after the
/// prefix; matching decodes the suffix alone from frame 0.
pub fn continuation(decoded: &Matrix, completer: &Completer) -> Matrix {
    match completer.mode() {
        CompletionMode::Completion => decoded.slice_rows(completer.prefix_len(), decoded.rows()),
        CompletionMode::Matching => decoded.slice_rows(0, completer.target_len().min(decoded.rows())),
    }
}

/// [`predict_full`] followed by [`continuation`].
pub fn predict_suffix(params: &ModelParams, cfg: &ArchConfig, completer: &Completer, x: &Matrix) -> Result<Matrix> {
    Ok(continuation(&predict_full(params, cfg, completer, x)?, completer))
}

/// D(G(E(X)) + scale·σ⊙ε) with ε standard normal per component.
pub fn generate_noisy<R: Rng + ?Sized>(
    params: &ModelParams,
    cfg: &ArchConfig,
    completer: &Completer,
    x: &Matrix,
    scale: f64,
    rng: &mut R,
) -> Result<Matrix> {
    if !(scale >= 0.0) {
        return Err(Error::arg(format!("noise scale {scale} must be non-negative")));
    }
    let sigma = completer
        .sigma()
        .ok_or_else(|| Error::arg("completer carries no sigma for noise scaling"))?;
    let mut code = complete_code(params, cfg, completer, x)?;
    if sigma.len() != code.z.len() {
        return Err(Error::arg(format!(
            "sigma of dimension {}, code of {}",
            sigma.len(),
            code.z.len()
        )));
    }
    for (z, s) in code.z.iter_mut().zip(sigma) {
        let eps: f64 = rng.sample(StandardNormal);
        *z += scale * s * eps;
    }
    params.decode(cfg, &code)
}

/// Decodes `k + 1` codes evenly spaced from `za` to `zb`.
pub fn interpolate(
    params: &ModelParams,
    cfg: &ArchConfig,
    za: &LatentCode,
    zb: &LatentCode,
    k: usize,
) -> Result<Vec<Matrix>> {
    if k == 0 {
        return Err(Error::arg("interpolation needs at least one step"));
    }
    if za.z.len() != zb.z.len() {
        return Err(Error::arg(format!(
            "endpoint codes differ in dimension ({} vs {})",
            za.z.len(),
            zb.z.len()
        )));
    }
    (0..=k)
        .map(|i| {
            let a = i as f64 / k as f64;
            let z = za.z.iter().zip(&zb.z).map(|(p, q)| (1.0 - a) * p + a * q).collect();
            params.decode(cfg, &LatentCode { z, prefix_len: cfg.frames })
        })
        .collect()
}

/// Frame-averaged label channels (the last `labels` columns), clamped at zero
/// and normalized; uniform when nothing is positive.
pub fn read_label_probs(decoded: &Matrix, labels: usize) -> Result<Vec<f64>> {
    if labels == 0 || decoded.cols() < labels || decoded.rows() == 0 {
        return Err(Error::arg(format!(
            "{} channels cannot carry {labels} label channels",
            decoded.cols()
        )));
    }
    let first = decoded.cols() - labels;
    let mut p = vec![0.0; labels];
    for row in decoded.row_iter() {
        p.iter_mut().zip(&row[first..]).for_each(|(a, b)| *a += b);
    }
    p.iter_mut().for_each(|v| *v = (*v / decoded.rows() as f64).max(0.0));
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|v| *v /= total);
    } else {
        p.iter_mut().for_each(|v| *v = 1.0 / labels as f64);
    }
    Ok(p)
}

fn strip_labels(full: &Matrix, labels: usize) -> Matrix {
    let mut out = full.clone();
    let first = full.cols() - labels;
    for t in 0..out.rows() {
        out.row_mut(t)[first..].iter_mut().for_each(|v| *v = 0.0);
    }
    out
}

/// Pairs the code of each window with its label channels zeroed (input)
/// against the code of the labelled window (target).
pub fn label_pairs(params: &ModelParams, cfg: &ArchConfig, windows: &[Matrix], labels: usize) -> Result<PatternPairSet> {
    if labels == 0 || cfg.features <= labels {
        return Err(Error::arg(format!("{} features cannot carry {labels} labels", cfg.features)));
    }
    let mut inputs = Vec::with_capacity(windows.len());
    let mut targets = Vec::with_capacity(windows.len());
    for w in windows {
        inputs.push(params.encode_prefix(cfg, &strip_labels(w, labels))?.z);
        targets.push(params.encode_prefix(cfg, w)?.z);
    }
    PatternPairSet::new(cfg.blocks(), CompletionMode::Completion, cfg.frames, cfg.frames, inputs, targets)
}

/// Class probabilities for an unlabelled window under a label completer.
pub fn classify_window(
    params: &ModelParams,
    cfg: &ArchConfig,
    completer: &Completer,
    window: &Matrix,
    labels: usize,
) -> Result<Vec<f64>> {
    let decoded = predict_full(params, cfg, completer, &strip_labels(window, labels))?;
    read_label_probs(&decoded, labels)
}
