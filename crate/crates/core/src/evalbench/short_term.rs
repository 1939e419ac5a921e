use serde::{Deserialize, Serialize};

use super::clips::{find_sequence, Clip, ClipSelection};
use super::metric::{errors_at_horizons, frame_angle_errors};
use super::table::ErrorTable;
use crate::error::{Error, Result};
use crate::motiondata::{MotionSequence, NormStats};
use crate::ndmath::Matrix;

/// Errors of one clip at each horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipError {
    #[serde(flatten)]
    pub clip: Clip,
    pub horizons_ms: Vec<u32>,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortTermReport {
    pub table: ErrorTable,
    pub clips: Vec<ClipError>,
}

impl ShortTermReport {
    /// One JSON object per clip and line.
    pub fn clips_jsonl(&self) -> String {
        let mut out = String::new();
        for c in &self.clips {
            // serializing plain strings and numbers cannot fail
            out.push_str(&serde_json::to_string(c).unwrap_or_default());
            out.push('\n');
        }
        out
    }
}

/// Scores `predictor` on every selected clip.
///
/// `seqs` are raw sequences at `fps`. The predictor receives the normalized
/// input window and returns at least `output_frames` normalized frames; both
/// prediction and ground truth are mapped back through `stats` before scoring,
/// so channels dropped by the statistics compare equal. Each action's row is
/// the error curve averaged over its clips, read at `horizons_ms`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_short_term<F>(
    mut predictor: F,
    seqs: &[MotionSequence],
    selection: &ClipSelection,
    stats: &NormStats,
    input_frames: usize,
    output_frames: usize,
    horizons_ms: &[u32],
    fps: f64,
) -> Result<ShortTermReport>
where
    F: FnMut(&Clip, &Matrix) -> Result<Matrix>,
{
    selection.validate(seqs, input_frames, output_frames)?;
    let mut table = ErrorTable::for_horizons(horizons_ms);
    let mut clips = Vec::with_capacity(selection.clips.len());
    for action in selection.actions() {
        let mut mean_curve = vec![0.0; output_frames];
        let mut count = 0usize;
        for clip in selection.clips.iter().filter(|c| c.action == action) {
            let seq = find_sequence(seqs, &clip.action, clip.subject, clip.take)
                .ok_or_else(|| Error::Selection(format!("missing sequence for clip {clip:?}")))?;
            let input = stats.forward(&seq.frames.slice_rows(clip.split - input_frames, clip.split))?;
            let gt = stats.forward(&seq.frames.slice_rows(clip.split, clip.split + output_frames))?;
            let pred = predictor(clip, &input)?;
            if pred.rows() < output_frames || pred.cols() != gt.cols() {
                return Err(Error::shape(format!(
                    "predictor returned {:?}, need at least {} × {}",
                    pred.shape(),
                    output_frames,
                    gt.cols()
                )));
            }
            let curve = frame_angle_errors(
                &stats.inverse(&pred.slice_rows(0, output_frames))?,
                &stats.inverse(&gt)?,
            )?;
            clips.push(ClipError {
                clip: clip.clone(),
                horizons_ms: horizons_ms.to_vec(),
                errors: errors_at_horizons(&curve, horizons_ms, fps)?,
            });
            mean_curve.iter_mut().zip(&curve).for_each(|(m, e)| *m += e);
            count += 1;
        }
        mean_curve.iter_mut().for_each(|m| *m /= count as f64);
        table.push(action, errors_at_horizons(&mean_curve, horizons_ms, fps)?)?;
    }
    Ok(ShortTermReport { table, clips })
}
