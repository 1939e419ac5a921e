//! Loading, preprocessing and windowing of skeleton motion, plus the
//! angle-representation conversions used by the evaluation metric.

mod labels;
mod norm;
mod rotation;
mod sequence;
mod synth;
mod window;

pub use labels::{append_label, LabelId, LabelVocab, H36M_ACTIONS};
pub use norm::{
    compute_norm_stats, compute_norm_stats_frames, normalize, Direction, NormScheme, NormStats,
    DEFAULT_IGNORE_THRESHOLD,
};
pub use rotation::{euler_to_rotmat, expmap_to_rotmat, orthonormality_error, rotmat_to_euler, Mat3};
pub use sequence::{
    downsample, list_dataset_files, load_expmap_file, parse_path_convention, write_expmap_file,
    MotionSequence, SOURCE_FPS,
};
pub use synth::{synth_dataset, synth_motion, SynthFamily, SYNTH_FPS};
pub use window::{window_at, window_sample, SampleWindow};

pub mod rot3 {
    pub use super::rotation::{det, identity, mul, transpose};
}
