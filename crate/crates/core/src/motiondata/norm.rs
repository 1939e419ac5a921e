use serde::{Deserialize, Serialize};

use super::sequence::MotionSequence;
use crate::error::{Error, Result};
use crate::ndmath::Matrix;

/// Channels whose training standard deviation falls below this are dropped.
pub const DEFAULT_IGNORE_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormScheme {
    /// Mean-subtract, then scale the centred extrema to [−1, 1].
    UnitRange,
    /// Mean-subtract, divide by the standard deviation.
    Zscore,
}

impl NormScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            NormScheme::UnitRange => "unit_range",
            NormScheme::Zscore => "zscore",
        }
    }
}

impl std::str::FromStr for NormScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit_range" => Ok(NormScheme::UnitRange),
            "zscore" => Ok(NormScheme::Zscore),
            other => Err(Error::arg(format!("unknown normalization scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Per-channel statistics of the training frames; the reversible preprocessing contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub keep_mask: Vec<bool>,
    pub scheme: NormScheme,
}

impl NormStats {
    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn kept_channels(&self) -> usize {
        self.keep_mask.iter().filter(|&&k| k).count()
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        self.keep_mask
            .iter()
            .enumerate()
            .filter(|(_, &k)| k)
            .map(|(i, _)| i)
            .collect()
    }

    /// Maps raw frames to the kept, normalized channels.
    pub fn forward(&self, frames: &Matrix) -> Result<Matrix> {
        if frames.cols() != self.channels() {
            return Err(Error::shape(format!(
                "{} channels, stats cover {}",
                frames.cols(),
                self.channels()
            )));
        }
        let kept = self.kept_indices();
        let coeffs = self.coefficients(&kept)?;
        let mut out = Matrix::zeros(frames.rows(), kept.len());
        for r in 0..frames.rows() {
            let src = frames.row(r);
            let dst = out.row_mut(r);
            for (k, &c) in kept.iter().enumerate() {
                let (scale, shift) = coeffs[k];
                dst[k] = (src[c] - self.mean[c]) * scale + shift;
            }
        }
        Ok(out)
    }

    /// Restores raw channels; dropped channels come back as their training mean.
    pub fn inverse(&self, frames: &Matrix) -> Result<Matrix> {
        let kept = self.kept_indices();
        if frames.cols() != kept.len() {
            return Err(Error::shape(format!(
                "{} normalized channels, stats keep {}",
                frames.cols(),
                kept.len()
            )));
        }
        let coeffs = self.coefficients(&kept)?;
        let mut out = Matrix::zeros(frames.rows(), self.channels());
        for r in 0..frames.rows() {
            out.row_mut(r).copy_from_slice(&self.mean);
            let src = frames.row(r);
            let dst = out.row_mut(r);
            for (k, &c) in kept.iter().enumerate() {
                let (scale, shift) = coeffs[k];
                dst[c] = (src[k] - shift) / scale + self.mean[c];
            }
        }
        Ok(out)
    }

    /// (scale, shift) per kept channel so that `normalized = (x − mean)·scale + shift`.
    fn coefficients(&self, kept: &[usize]) -> Result<Vec<(f64, f64)>> {
        kept.iter()
            .map(|&c| match self.scheme {
                NormScheme::Zscore => {
                    if self.std[c] <= 0.0 {
                        return Err(Error::Stats(format!("zero std on kept channel {c}")));
                    }
                    Ok((1.0 / self.std[c], 0.0))
                }
                NormScheme::UnitRange => {
                    let lo = self.min[c] - self.mean[c];
                    let hi = self.max[c] - self.mean[c];
                    let range = hi - lo;
                    if range <= 0.0 {
                        return Err(Error::Stats(format!("zero range on kept channel {c}")));
                    }
                    // 2·(x − mean − lo)/range − 1
                    Ok((2.0 / range, -2.0 * lo / range - 1.0))
                }
            })
            .collect()
    }
}

/// Per-channel mean / population std / extrema over every training frame.
pub fn compute_norm_stats(
    train: &[MotionSequence],
    scheme: NormScheme,
    ignore_threshold: f64,
) -> Result<NormStats> {
    let frames: Vec<&Matrix> = train.iter().map(|s| &s.frames).collect();
    compute_norm_stats_frames(&frames, scheme, ignore_threshold)
}

pub fn compute_norm_stats_frames(
    train: &[&Matrix],
    scheme: NormScheme,
    ignore_threshold: f64,
) -> Result<NormStats> {
    let first = train
        .first()
        .ok_or_else(|| Error::arg("normalization stats need at least one sequence"))?;
    let channels = first.cols();
    if train.iter().any(|m| m.cols() != channels) {
        return Err(Error::shape("training sequences disagree on channel count"));
    }
    let count: usize = train.iter().map(|m| m.rows()).sum();
    if count == 0 {
        return Err(Error::arg("normalization stats need at least one frame"));
    }
    let mut mean = vec![0.0; channels];
    let mut min = vec![f64::INFINITY; channels];
    let mut max = vec![f64::NEG_INFINITY; channels];
    for m in train {
        for row in m.row_iter() {
            for c in 0..channels {
                mean[c] += row[c];
                min[c] = min[c].min(row[c]);
                max[c] = max[c].max(row[c]);
            }
        }
    }
    mean.iter_mut().for_each(|v| *v /= count as f64);
    let mut var = vec![0.0; channels];
    for m in train {
        for row in m.row_iter() {
            for c in 0..channels {
                let d = row[c] - mean[c];
                var[c] += d * d;
            }
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / count as f64).sqrt()).collect();
    let keep_mask = std.iter().map(|&s| s >= ignore_threshold).collect();
    Ok(NormStats {
        mean,
        std,
        min,
        max,
        keep_mask,
        scheme,
    })
}

/// Applies `stats` to a whole sequence in the given direction.
pub fn normalize(seq: &MotionSequence, stats: &NormStats, direction: Direction) -> Result<MotionSequence> {
    let frames = match direction {
        Direction::Forward => stats.forward(&seq.frames)?,
        Direction::Inverse => stats.inverse(&seq.frames)?,
    };
    Ok(MotionSequence {
        frames,
        ..seq.clone()
    })
}
