//! Latent pattern completion: vector addition, a single-layer learned map,
//! their suffix-matching counterparts, generation and interpolation.

mod add;
mod fnmap;
mod ops;

pub use add::{complete_add, compute_vj, latent_diff, pattern_pairs, CompletionMode, CompletionVector, PatternPairSet};
pub use fnmap::{fit_fn, fn_loss_and_grad, fn_mae, FnCompleter, FnTrainConfig};
pub use ops::{
    classify_window, continuation, generate_noisy, interpolate, label_pairs, predict_full, predict_suffix,
    read_label_probs, Completer,
};
