//! Evaluation: the short-term mean-angle-error protocol, the zero-velocity
//! baseline and the completion/matching ablation.

mod ablation;
mod clips;
mod metric;
mod short_term;
mod table;

pub use ablation::{
    draw_windows, e2e_suffix, run_ablation, suffix_errors, AblationConfig, AblationOutcome, AblationReport,
    ABLATION_CONFIGS,
};
pub use clips::{Clip, ClipSelection, CLIPS_PER_ACTION, REFERENCE_SEED, REFERENCE_SUBJECT};
pub use metric::{
    benchmark_euler, errors_at_horizons, frame_angle_errors, frame_euclidean_errors, frames_to_euler, horizon_frame,
    mean_angle_error, zero_velocity_predict, CHANNEL_STD_THRESHOLD, GLOBAL_CHANNELS, HORIZONS_MS,
};
pub use short_term::{evaluate_short_term, ClipError, ShortTermReport};
pub use table::{ErrorTable, AVERAGE_LABEL};
