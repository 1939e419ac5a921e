use crate::error::{Error, Result};
use crate::motiondata::{expmap_to_rotmat, rot3, rotmat_to_euler, NormStats};
use crate::ndmath::Matrix;

/// Short-term horizons in milliseconds.
pub const HORIZONS_MS: [u32; 4] = [80, 160, 320, 400];

/// Channels 0–5 (global translation and rotation) are never scored.
pub const GLOBAL_CHANNELS: usize = 6;

/// Channels whose ground-truth std within a clip is at or below this are skipped.
pub const CHANNEL_STD_THRESHOLD: f64 = 1e-4;

/// 1-based frame index of a horizon: `round(ms · fps / 1000)`.
pub fn horizon_frame(ms: u32, fps: f64) -> usize {
    (ms as f64 * fps / 1000.0).round() as usize
}

/// Repeats the last frame of `x` `horizon` times.
pub fn zero_velocity_predict(x: &Matrix, horizon: usize) -> Result<Matrix> {
    if x.rows() == 0 {
        return Err(Error::arg("zero-velocity prediction needs at least one frame"));
    }
    let last = x.row(x.rows() - 1);
    let mut out = Matrix::zeros(horizon, x.cols());
    for t in 0..horizon {
        out.row_mut(t).copy_from_slice(last);
    }
    Ok(out)
}

/// Euler angles of one exponential-map triple in the benchmark's convention:
/// the z-y-x decomposition of the transposed rotation.
pub fn benchmark_euler(v: [f64; 3]) -> [f64; 3] {
    let r = rot3::transpose(&expmap_to_rotmat(v));
    // transposing keeps the matrix orthonormal, so this cannot fail
    rotmat_to_euler(&r).unwrap_or([0.0; 3])
}

/// Converts every joint triple after the root translation to Euler angles.
pub fn frames_to_euler(frames: &Matrix) -> Matrix {
    let mut out = frames.clone();
    let cols = frames.cols();
    for t in 0..frames.rows() {
        let row = out.row_mut(t);
        let mut k = 3;
        while k + 3 <= cols {
            let e = benchmark_euler([row[k], row[k + 1], row[k + 2]]);
            row[k..k + 3].copy_from_slice(&e);
            k += 3;
        }
    }
    out
}

/// Per-frame Euclidean error between raw (unnormalized) expmap frames.
///
/// Global channels are zeroed and only channels whose ground-truth std over
/// the clip exceeds [`CHANNEL_STD_THRESHOLD`] contribute.
pub fn frame_angle_errors(pred: &Matrix, gt: &Matrix) -> Result<Vec<f64>> {
    if pred.shape() != gt.shape() {
        return Err(Error::shape(format!(
            "prediction {:?} vs ground truth {:?}",
            pred.shape(),
            gt.shape()
        )));
    }
    let p = frames_to_euler(pred);
    let g = frames_to_euler(gt);
    let rows = g.rows();
    let used: Vec<usize> = (GLOBAL_CHANNELS.min(g.cols())..g.cols())
        .filter(|&c| {
            let mean = (0..rows).map(|t| g.get(t, c)).sum::<f64>() / rows as f64;
            let var = (0..rows).map(|t| (g.get(t, c) - mean).powi(2)).sum::<f64>() / rows as f64;
            var.sqrt() > CHANNEL_STD_THRESHOLD
        })
        .collect();
    Ok((0..rows)
        .map(|t| used.iter().map(|&c| (p.get(t, c) - g.get(t, c)).powi(2)).sum::<f64>().sqrt())
        .collect())
}

/// Reads a per-frame error curve at the given horizons.
pub fn errors_at_horizons(curve: &[f64], horizons_ms: &[u32], fps: f64) -> Result<Vec<f64>> {
    horizons_ms
        .iter()
        .map(|&h| {
            let f = horizon_frame(h, fps);
            if f == 0 || f > curve.len() {
                return Err(Error::arg(format!(
                    "horizon {h} ms is frame {f}, prediction has {} frames",
                    curve.len()
                )));
            }
            Ok(curve[f - 1])
        })
        .collect()
}

/// Mean angle error of one normalized prediction at each horizon.
pub fn mean_angle_error(pred: &Matrix, gt: &Matrix, stats: &NormStats, horizons_ms: &[u32], fps: f64) -> Result<Vec<f64>> {
    let p = stats.inverse(pred)?;
    let g = stats.inverse(gt)?;
    errors_at_horizons(&frame_angle_errors(&p, &g)?, horizons_ms, fps)
}

/// Per-frame Euclidean distance over all channels, for data without joint structure.
pub fn frame_euclidean_errors(pred: &Matrix, gt: &Matrix) -> Result<Vec<f64>> {
    if pred.shape() != gt.shape() {
        return Err(Error::shape(format!(
            "prediction {:?} vs ground truth {:?}",
            pred.shape(),
            gt.shape()
        )));
    }
    Ok(pred
        .row_iter()
        .zip(gt.row_iter())
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
        .collect())
}
