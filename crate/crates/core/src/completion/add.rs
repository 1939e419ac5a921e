use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs2sae::{ArchConfig, LatentCode, ModelParams};
use crate::motiondata::SampleWindow;

/// Whether a completer targets the code of the whole window or of the suffix alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionMode {
    /// E(X) → E(XY)
    Completion,
    /// E(X) → E(Y), with Y encoded as its own zero-padded sequence.
    Matching,
}

impl CompletionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CompletionMode::Completion => "completion",
            CompletionMode::Matching => "matching",
        }
    }
}

impl fmt::Display for CompletionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CompletionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "completion" => Ok(CompletionMode::Completion),
            "matching" => Ok(CompletionMode::Matching),
            _ => Err(Error::arg(format!("unknown completion mode {s:?}"))),
        }
    }
}

/// Input codes `p_i` paired with target codes `c_i`, all for one prefix index.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternPairSet {
    pub j: usize,
    pub mode: CompletionMode,
    /// Frames encoded by each input code.
    pub prefix_len: usize,
    /// Frames encoded by each target code.
    pub target_len: usize,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl PatternPairSet {
    pub fn new(
        j: usize,
        mode: CompletionMode,
        prefix_len: usize,
        target_len: usize,
        inputs: Vec<Vec<f64>>,
        targets: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::arg(format!(
                "need a nonempty, equal number of inputs and targets (got {} and {})",
                inputs.len(),
                targets.len()
            )));
        }
        let n = inputs[0].len();
        if inputs.iter().chain(&targets).any(|c| c.len() != n) {
            return Err(Error::arg("pattern codes differ in dimension"));
        }
        Ok(Self {
            j,
            mode,
            prefix_len,
            target_len,
            inputs,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn diffs(&self) -> Vec<Vec<f64>> {
        self.inputs
            .iter()
            .zip(&self.targets)
            .map(|(p, c)| c.iter().zip(p).map(|(a, b)| a - b).collect())
            .collect()
    }
}

fn encode_pair(
    params: &ModelParams,
    cfg: &ArchConfig,
    pair: &SampleWindow,
    mode: CompletionMode,
) -> Result<(LatentCode, LatentCode)> {
    if pair.full.rows() != cfg.frames || pair.x.rows() != pair.j * cfg.block {
        return Err(Error::arg(format!(
            "window of {} frames split at {} does not fit T={}, τ={}",
            pair.full.rows(),
            pair.x.rows(),
            cfg.frames,
            cfg.block
        )));
    }
    let p = params.encode_prefix(cfg, &pair.x)?;
    let c = match mode {
        CompletionMode::Completion => params.encode_prefix(cfg, &pair.full)?,
        CompletionMode::Matching => {
            if pair.y.rows() == 0 {
                return Err(Error::arg("matching needs a nonempty suffix"));
            }
            params.encode_prefix(cfg, &pair.y)?
        }
    };
    Ok((p, c))
}

/// `d_j`: completion mode gives E(XY) − E(X), matching mode E(Y) − E(X).
pub fn latent_diff(params: &ModelParams, cfg: &ArchConfig, pair: &SampleWindow, mode: CompletionMode) -> Result<Vec<f64>> {
    let (p, c) = encode_pair(params, cfg, pair, mode)?;
    Ok(c.z.iter().zip(&p.z).map(|(a, b)| a - b).collect())
}

/// Encodes every window into an input/target code pair.
pub fn pattern_pairs(
    params: &ModelParams,
    cfg: &ArchConfig,
    windows: &[SampleWindow],
    mode: CompletionMode,
) -> Result<PatternPairSet> {
    let first = windows.first().ok_or_else(|| Error::arg("no windows to encode"))?;
    let j = first.j;
    let mut inputs = Vec::with_capacity(windows.len());
    let mut targets = Vec::with_capacity(windows.len());
    for w in windows {
        if w.j != j {
            return Err(Error::arg(format!("mixed prefix indices {j} and {}", w.j)));
        }
        let (p, c) = encode_pair(params, cfg, w, mode)?;
        inputs.push(p.z);
        targets.push(c.z);
    }
    let target_len = match mode {
        CompletionMode::Completion => cfg.frames,
        CompletionMode::Matching => cfg.frames - j * cfg.block,
    };
    PatternPairSet::new(j, mode, j * cfg.block, target_len, inputs, targets)
}

/// Mean latent difference `v_j` and its per-component spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionVector {
    pub j: usize,
    pub mode: CompletionMode,
    pub prefix_len: usize,
    pub target_len: usize,
    pub v: Vec<f64>,
    /// Population standard deviation of the differences.
    pub sigma: Vec<f64>,
    pub sample_count: usize,
}

impl CompletionVector {
    pub fn from_pairs(pairs: &PatternPairSet) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::arg("cannot average an empty pair set"));
        }
        let diffs = pairs.diffs();
        let n = pairs.dim();
        let count = diffs.len() as f64;
        let mut v = vec![0.0; n];
        for d in &diffs {
            v.iter_mut().zip(d).for_each(|(a, b)| *a += b);
        }
        v.iter_mut().for_each(|a| *a /= count);
        let mut var = vec![0.0; n];
        for d in &diffs {
            for ((s, x), m) in var.iter_mut().zip(d).zip(&v) {
                *s += (x - m) * (x - m);
            }
        }
        Ok(Self {
            j: pairs.j,
            mode: pairs.mode,
            prefix_len: pairs.prefix_len,
            target_len: pairs.target_len,
            v,
            sigma: var.into_iter().map(|s| (s / count).sqrt()).collect(),
            sample_count: diffs.len(),
        })
    }

    pub fn mean_sigma(&self) -> f64 {
        self.sigma.iter().sum::<f64>() / self.sigma.len().max(1) as f64
    }
}

/// `v_j` over `windows`, all of which must share prefix index `j`.
pub fn compute_vj(
    params: &ModelParams,
    cfg: &ArchConfig,
    windows: &[SampleWindow],
    j: usize,
    mode: CompletionMode,
) -> Result<CompletionVector> {
    if windows.is_empty() {
        return Err(Error::arg("compute_vj needs at least one window"));
    }
    if let Some(w) = windows.iter().find(|w| w.j != j) {
        return Err(Error::arg(format!("window has prefix index {}, expected {j}", w.j)));
    }
    CompletionVector::from_pairs(&pattern_pairs(params, cfg, windows, mode)?)
}

/// `z + v_j`, relabelled as a code of the completer's target length.
pub fn complete_add(z: &LatentCode, cv: &CompletionVector) -> Result<LatentCode> {
    if z.prefix_len != cv.prefix_len {
        return Err(Error::arg(format!(
            "code covers {} frames, completion vector expects {}",
            z.prefix_len, cv.prefix_len
        )));
    }
    if z.z.len() != cv.v.len() {
        return Err(Error::arg(format!(
            "code of dimension {}, completion vector of {}",
            z.z.len(),
            cv.v.len()
        )));
    }
    Ok(LatentCode {
        z: z.z.iter().zip(&cv.v).map(|(a, b)| a + b).collect(),
        prefix_len: cv.target_len,
    })
}
