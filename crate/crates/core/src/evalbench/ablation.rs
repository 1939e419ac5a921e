use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metric::frame_euclidean_errors;
use crate::completion::{
    fit_fn, pattern_pairs, predict_suffix, Completer, CompletionMode, CompletionVector, FnTrainConfig,
};
use crate::error::{Error, Result};
use crate::hs2sae::{rng_for, train_autoencoder, ArchConfig, E2eTarget, ModelParams, TrainConfig, Variant};
use crate::motiondata::{window_sample, SampleWindow};
use crate::ndmath::Matrix;

pub const ABLATION_CONFIGS: [&str; 8] = [
    "h_seq2seq_x_to_y",
    "h_seq2seq_x_to_xy",
    "basic_add",
    "basic_fn",
    "ours_add_completion",
    "ours_fn_completion",
    "ours_add_matching",
    "ours_fn_matching",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    /// Prefix index whose continuation is scored.
    pub j: usize,
    /// Training windows used to fit completers.
    pub pair_windows: usize,
    pub test_windows: usize,
    /// 1-based suffix frames reported as columns.
    pub horizon_frames: Vec<usize>,
    pub fn_train: FnTrainConfig,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            j: 1,
            pair_windows: 1000,
            test_windows: 256,
            horizon_frames: vec![2, 4, 8, 10],
            fn_train: FnTrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AblationOutcome {
    Done {
        errors: Vec<f64>,
        sigma_mean: Option<f64>,
        sigma_std: Option<f64>,
        /// Per test window, errors at each horizon.
        per_window: Vec<Vec<f64>>,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub horizon_frames: Vec<usize>,
    pub entries: Vec<(String, AblationOutcome)>,
}

impl AblationReport {
    pub fn get(&self, name: &str) -> Option<&AblationOutcome> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, o)| o)
    }

    pub fn errors(&self, name: &str) -> Option<&[f64]> {
        match self.get(name)? {
            AblationOutcome::Done { errors, .. } => Some(errors),
            AblationOutcome::Skipped { .. } => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("configuration");
        for f in &self.horizon_frames {
            let _ = write!(out, ",frame_{f}");
        }
        out.push_str(",sigma_mean,sigma_std,status\n");
        let opt = |v: &Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for (name, outcome) in &self.entries {
            out.push_str(name);
            match outcome {
                AblationOutcome::Done { errors, sigma_mean, sigma_std, .. } => {
                    for e in errors {
                        let _ = write!(out, ",{e:.6}");
                    }
                    let _ = writeln!(out, ",{},{},ok", opt(sigma_mean), opt(sigma_std));
                }
                AblationOutcome::Skipped { reason } => {
                    out.push_str(&",".repeat(self.horizon_frames.len() + 2));
                    let _ = writeln!(out, ",skipped: {}", reason.replace([',', '\n'], ";"));
                }
            }
        }
        out
    }

    /// One JSON object per (configuration, test window).
    pub fn per_window_jsonl(&self) -> String {
        let mut out = String::new();
        for (name, outcome) in &self.entries {
            if let AblationOutcome::Done { per_window, .. } = outcome {
                for (i, e) in per_window.iter().enumerate() {
                    let line = serde_json::json!({
                        "configuration": name,
                        "window": i,
                        "horizon_frames": self.horizon_frames,
                        "errors": e,
                    });
                    let _ = writeln!(out, "{line}");
                }
            }
        }
        out
    }
}

/// Draws `count` windows with prefix index `j` from uniformly chosen sequences.
pub fn draw_windows(
    seqs: &[Matrix],
    cfg: &ArchConfig,
    j: usize,
    count: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<SampleWindow>> {
    use rand::Rng;
    let pool: Vec<&Matrix> = seqs.iter().filter(|s| s.rows() >= cfg.frames).collect();
    if pool.is_empty() {
        return Err(Error::Data(format!("no sequence has at least {} frames", cfg.frames)));
    }
    let mut rng = rng_for(seed, stream);
    (0..count)
        .map(|_| {
            let s = pool[rng.random_range(0..pool.len())];
            window_sample(s, cfg.frames, j, cfg.block, &mut rng)
        })
        .collect()
}

/// Per-window suffix errors at `horizons` (1-based) for an arbitrary predictor.
pub fn suffix_errors<F>(windows: &[SampleWindow], horizons: &[usize], mut predict: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&Matrix) -> Result<Matrix>,
{
    windows
        .iter()
        .map(|w| {
            let pred = predict(&w.x)?;
            if pred.rows() < w.y.rows() {
                return Err(Error::shape(format!(
                    "prediction of {} frames for a suffix of {}",
                    pred.rows(),
                    w.y.rows()
                )));
            }
            let curve = frame_euclidean_errors(&pred.slice_rows(0, w.y.rows()), &w.y)?;
            horizons
                .iter()
                .map(|&h| {
                    curve.get(h.wrapping_sub(1)).copied().ok_or_else(|| {
                        Error::arg(format!("horizon frame {h} outside a suffix of {}", curve.len()))
                    })
                })
                .collect()
        })
        .collect()
}

fn column_means(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len().max(1) as f64;
    let cols = rows.first().map_or(0, Vec::len);
    (0..cols).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n).collect()
}

fn sigma_stats(sigma: &[f64]) -> (f64, f64) {
    let n = sigma.len().max(1) as f64;
    let mean = sigma.iter().sum::<f64>() / n;
    let var = sigma.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Frames `[jτ, T)` of the end-to-end reconstruction of a prefix.
pub fn e2e_suffix(params: &ModelParams, cfg: &ArchConfig, x: &Matrix) -> Result<Matrix> {
    let out = params.decode(cfg, &params.encode_prefix(cfg, x)?)?;
    Ok(out.slice_rows(x.rows(), cfg.frames))
}

struct Ctx<'a> {
    cfg: ArchConfig,
    ac: &'a AblationConfig,
    pair_windows: Vec<SampleWindow>,
    test_windows: Vec<SampleWindow>,
}

impl Ctx<'_> {
    fn completer_outcome(
        &self,
        params: &ModelParams,
        cfg: &ArchConfig,
        mode: CompletionMode,
        learned: bool,
    ) -> Result<AblationOutcome> {
        let pairs = pattern_pairs(params, cfg, &self.pair_windows, mode)?;
        let completer = if learned {
            Completer::Fn(fit_fn(&pairs, &self.ac.fn_train)?)
        } else {
            Completer::Add(CompletionVector::from_pairs(&pairs)?)
        };
        let per_window = suffix_errors(&self.test_windows, &self.ac.horizon_frames, |x| {
            predict_suffix(params, cfg, &completer, x)
        })?;
        let (m, s) = sigma_stats(completer.sigma().unwrap_or(&[]));
        Ok(AblationOutcome::Done {
            errors: column_means(&per_window),
            sigma_mean: Some(m),
            sigma_std: Some(s),
            per_window,
        })
    }

    fn e2e_outcome(&self, params: &ModelParams, cfg: &ArchConfig) -> Result<AblationOutcome> {
        let per_window = suffix_errors(&self.test_windows, &self.ac.horizon_frames, |x| e2e_suffix(params, cfg, x))?;
        Ok(AblationOutcome::Done {
            errors: column_means(&per_window),
            sigma_mean: None,
            sigma_std: None,
            per_window,
        })
    }
}

fn record(entries: &mut Vec<(String, AblationOutcome)>, name: &str, result: Result<AblationOutcome>) {
    let outcome = result.unwrap_or_else(|e| AblationOutcome::Skipped { reason: e.to_string() });
    entries.push((name.to_string(), outcome));
}

/// Trains every ablation configuration on `train` and scores suffix prediction
/// on windows drawn from `test`. A configuration that fails is recorded as
/// skipped and the rest still run.
pub fn run_ablation(
    train: &[Matrix],
    test: &[Matrix],
    cfg: &ArchConfig,
    tc: &TrainConfig,
    ac: &AblationConfig,
) -> Result<AblationReport> {
    let base = ArchConfig { variant: Variant::Hs2sae, ..*cfg };
    base.validate()?;
    if ac.j == 0 || ac.j >= base.blocks() {
        return Err(Error::Config(format!("ablation prefix index {} outside 1..{}", ac.j, base.blocks())));
    }
    let ctx = Ctx {
        cfg: base,
        ac,
        pair_windows: draw_windows(train, &base, ac.j, ac.pair_windows, tc.seed, 5)?,
        test_windows: draw_windows(test, &base, ac.j, ac.test_windows, tc.seed, 6)?,
    };
    let mut entries = Vec::new();

    for (name, target) in [(ABLATION_CONFIGS[0], E2eTarget::Suffix), (ABLATION_CONFIGS[1], E2eTarget::Full)] {
        let c = ArchConfig {
            variant: Variant::HSeq2Seq { prefix_blocks: ac.j, target },
            ..ctx.cfg
        };
        let result = train_autoencoder(train, &c, tc).and_then(|t| ctx.e2e_outcome(&t.params, &c));
        record(&mut entries, name, result);
    }

    let basic_cfg = ArchConfig { variant: Variant::BasicPad, ..ctx.cfg };
    let basic = train_autoencoder(train, &basic_cfg, tc);
    for (name, learned) in [(ABLATION_CONFIGS[2], false), (ABLATION_CONFIGS[3], true)] {
        let result = match &basic {
            Ok(t) => ctx.completer_outcome(&t.params, &basic_cfg, CompletionMode::Completion, learned),
            Err(e) => Err(Error::Data(format!("basic training failed: {e}"))),
        };
        record(&mut entries, name, result);
    }

    let ours = train_autoencoder(train, &ctx.cfg, tc);
    let combos = [
        (ABLATION_CONFIGS[4], CompletionMode::Completion, false),
        (ABLATION_CONFIGS[5], CompletionMode::Completion, true),
        (ABLATION_CONFIGS[6], CompletionMode::Matching, false),
        (ABLATION_CONFIGS[7], CompletionMode::Matching, true),
    ];
    for (name, mode, learned) in combos {
        let result = match &ours {
            Ok(t) => ctx.completer_outcome(&t.params, &ctx.cfg, mode, learned),
            Err(e) => Err(Error::Data(format!("training failed: {e}"))),
        };
        record(&mut entries, name, result);
    }
    Ok(AblationReport {
        horizon_frames: ac.horizon_frames.clone(),
        entries,
    })
}
