//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::bundle::{load_completer, save_completer, DatasetArtifact, ModelArtifact};
use super::config::RunConfig;
use crate::completion::{
    classify_window, fit_fn, generate_noisy, interpolate, label_pairs, pattern_pairs, predict_full, predict_suffix,
    Completer, CompletionMode, CompletionVector,
};
use crate::error::{Error, Result};
use crate::evalbench::{
    draw_windows, e2e_suffix, evaluate_short_term, frame_euclidean_errors, run_ablation, suffix_errors,
    zero_velocity_predict, ClipSelection, ErrorTable, HORIZONS_MS,
};
use crate::hs2sae::{rng_for, train_autoencoder, ArchConfig, LatentCode, ModelParams, TrainHistory, Variant};
use crate::motiondata::{
    append_label, compute_norm_stats, downsample, list_dataset_files, load_expmap_file, synth_dataset,
    write_expmap_file, LabelId, LabelVocab, MotionSequence, SOURCE_FPS,
};
use crate::ndmath::Matrix;

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn with_labels(frames: &Matrix, vocab: Option<&LabelVocab>, action: Option<&str>) -> Result<Matrix> {
    match vocab {
        None => Ok(frames.clone()),
        Some(v) => {
            let id = match action.and_then(|a| v.index_of(a)) {
                Some(i) => LabelId::Class(i),
                None => LabelId::Masked,
            };
            append_label(frames, id, v)
        }
    }
}

fn pose_columns(frames: &Matrix, labels: usize) -> Matrix {
    let cols = frames.cols() - labels;
    let mut out = Matrix::zeros(frames.rows(), cols);
    for t in 0..frames.rows() {
        out.row_mut(t).copy_from_slice(&frames.row(t)[..cols]);
    }
    out
}

/// Family or action name of a dataset key such as `sine_walk_3` or `S5/walking_1`.
fn group_of(key: &str) -> String {
    let base = key.rsplit('/').next().unwrap_or(key);
    match base.rsplit_once('_') {
        Some((head, tail)) if tail.chars().all(|c| c.is_ascii_digit()) => head.to_string(),
        _ => base.to_string(),
    }
}

fn matrices(seqs: &[(String, Matrix)]) -> Vec<Matrix> {
    seqs.iter().map(|(_, m)| m.clone()).collect()
}

// ---------------------------------------------------------------- prepare-data

pub fn prepare_data(cfg: &RunConfig, synthetic: bool, out: &Path) -> Result<DatasetArtifact> {
    let (train, test, source, fps) = if synthetic || cfg.dataset == "synthetic" {
        let train = synth_dataset(
            &cfg.synthetic_families,
            cfg.synthetic_count,
            cfg.synthetic_channels,
            cfg.synthetic_length,
            cfg.seed,
        )?;
        let test = synth_dataset(
            &cfg.synthetic_families,
            cfg.synthetic_test_count,
            cfg.synthetic_channels,
            cfg.synthetic_length,
            cfg.seed ^ 0x07e5_75e7,
        )?;
        let fps = train.first().map_or(crate::motiondata::SYNTH_FPS, |s| s.fps);
        (train, test, "synthetic".to_string(), fps)
    } else {
        let root = cfg.resolve_data_dir()?;
        let train = load_subjects(&root, &cfg.train_subjects, cfg)?;
        let test = load_subjects(&root, &cfg.test_subjects, cfg)?;
        (train, test, root.display().to_string(), SOURCE_FPS / cfg.downsample as f64)
    };
    if train.is_empty() {
        return Err(Error::Data("no training sequences found".into()));
    }
    let stats = compute_norm_stats(&train, cfg.norm, crate::motiondata::DEFAULT_IGNORE_THRESHOLD)?;
    let vocab = if cfg.labels {
        Some(if source == "synthetic" {
            LabelVocab::new(&cfg.synthetic_families.iter().map(|f| f.name()).collect::<Vec<_>>())?
        } else {
            LabelVocab::new(&cfg.actions)?
        })
    } else {
        None
    };
    let encode = |seqs: &[MotionSequence]| -> Result<Vec<(String, Matrix)>> {
        seqs.iter()
            .map(|s| {
                let key = s
                    .key()
                    .unwrap_or_else(|| format!("{}_{}", s.action.as_deref().unwrap_or("seq"), s.take.unwrap_or(0)));
                let m = stats.forward(&s.frames)?;
                Ok((key, with_labels(&m, vocab.as_ref(), s.action.as_deref())?))
            })
            .collect()
    };
    let art = DatasetArtifact {
        stats: stats.clone(),
        vocab: vocab.clone(),
        fps,
        source,
        test_subjects: cfg.test_subjects.clone(),
        train: encode(&train)?,
        test: encode(&test)?,
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    art.save(out)?;
    Ok(art)
}

fn load_subjects(root: &Path, subjects: &[u32], cfg: &RunConfig) -> Result<Vec<MotionSequence>> {
    let mut out = Vec::new();
    for path in list_dataset_files(root, subjects)? {
        let seq = load_expmap_file(&path)?;
        if seq.action.as_ref().is_some_and(|a| cfg.actions.contains(a)) {
            out.push(downsample(&seq, cfg.downsample)?);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- train-ae

pub fn history_csv(h: &TrainHistory) -> String {
    let mut s = String::from("step,loss\n");
    for (i, l) in h.step_loss.iter().enumerate() {
        let _ = writeln!(s, "{},{l:?}", i + 1);
    }
    s
}

pub fn validation_csv(h: &TrainHistory) -> String {
    let mut s = String::from("epoch,val_loss,best\n");
    for (i, l) in h.epoch_val_loss.iter().enumerate() {
        let _ = writeln!(s, "{},{l:?},{}", i + 1, u8::from(h.best_epoch == Some(i)));
    }
    s
}

pub fn train_ae(cfg: &RunConfig, dataset: &DatasetArtifact, out: &Path, history_dir: &Path) -> Result<ModelArtifact> {
    let data = matrices(&dataset.train);
    let features = data.first().map_or(0, Matrix::cols);
    let arch = cfg.arch(features)?;
    let trained = train_autoencoder(&data, &arch, &cfg.train())?;
    write_text(&history_dir.join("history.csv"), &history_csv(&trained.history))?;
    write_text(&history_dir.join("validation.csv"), &validation_csv(&trained.history))?;
    let art = ModelArtifact {
        arch,
        params: trained.params,
        stats: Some(dataset.stats.clone()),
        vocab: dataset.vocab.clone(),
    };
    art.save(out)?;
    Ok(art)
}

// ---------------------------------------------------------------- fit-completion

pub fn fit_completion(
    cfg: &RunConfig,
    model: &ModelArtifact,
    dataset: &DatasetArtifact,
    learned: bool,
    mode: CompletionMode,
    j: usize,
    out: &Path,
) -> Result<Completer> {
    let arch = model.arch;
    let windows = draw_windows(&matrices(&dataset.train), &arch, j, cfg.pair_windows, cfg.seed, 5)?;
    let pairs = pattern_pairs(&model.params, &arch, &windows, mode)?;
    let completer = if learned {
        Completer::Fn(fit_fn(&pairs, &cfg.fn_train())?)
    } else {
        Completer::Add(CompletionVector::from_pairs(&pairs)?)
    };
    save_completer(out, &completer)?;
    Ok(completer)
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorKind {
    ZeroVelocity,
    Add,
    Fn,
    HSeq2Seq,
    Basic,
}

impl PredictorKind {
    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::ZeroVelocity => "zero-velocity",
            PredictorKind::Add => "add",
            PredictorKind::Fn => "fn",
            PredictorKind::HSeq2Seq => "h-seq2seq",
            PredictorKind::Basic => "basic",
        }
    }
}

/// A predictor mapping a normalized pose prefix to normalized future poses.
struct Predictor<'a> {
    kind: PredictorKind,
    model: Option<&'a ModelArtifact>,
    completer: Option<&'a Completer>,
}

impl Predictor<'_> {
    fn check(&self) -> Result<()> {
        let need_model = self.kind != PredictorKind::ZeroVelocity;
        let need_completer = matches!(self.kind, PredictorKind::Add | PredictorKind::Fn | PredictorKind::Basic);
        if need_model && self.model.is_none() {
            return Err(Error::arg(format!("predictor {} needs --model", self.kind.name())));
        }
        if need_completer && self.completer.is_none() {
            return Err(Error::arg(format!("predictor {} needs --completer", self.kind.name())));
        }
        let variant = self.model.map(|m| m.arch.variant);
        match (self.kind, self.completer, variant) {
            (PredictorKind::Add, Some(Completer::Fn(_)), _) | (PredictorKind::Fn, Some(Completer::Add(_)), _) => {
                Err(Error::arg(format!("completer type does not match predictor {}", self.kind.name())))
            }
            (PredictorKind::HSeq2Seq, _, Some(v)) if !matches!(v, Variant::HSeq2Seq { .. }) => {
                Err(Error::arg("h-seq2seq predictor needs a model trained end to end"))
            }
            (PredictorKind::Basic, _, Some(v)) if v != Variant::BasicPad => {
                Err(Error::arg("basic predictor needs a basic_pad model"))
            }
            _ => Ok(()),
        }
    }

    /// Frames of prefix the predictor consumes.
    fn prefix_len(&self) -> Option<usize> {
        match (self.kind, self.model, self.completer) {
            (PredictorKind::ZeroVelocity, ..) => None,
            (PredictorKind::HSeq2Seq, Some(m), _) => match m.arch.variant {
                Variant::HSeq2Seq { prefix_blocks, .. } => Some(prefix_blocks * m.arch.block),
                _ => None,
            },
            (_, _, Some(c)) => Some(c.prefix_len()),
            _ => None,
        }
    }

    /// Predicts at least `horizon` frames following the normalized pose window `x`.
    fn predict(&self, x: &Matrix, action: Option<&str>, horizon: usize) -> Result<Matrix> {
        let Some(model) = self.model.filter(|_| self.kind != PredictorKind::ZeroVelocity) else {
            return zero_velocity_predict(x, horizon);
        };
        let need = self.prefix_len().unwrap_or(x.rows());
        if x.rows() < need {
            return Err(Error::arg(format!("input of {} frames, predictor needs {need}", x.rows())));
        }
        let x = with_labels(&x.slice_rows(x.rows() - need, x.rows()), model.vocab.as_ref(), action)?;
        let out = match (self.kind, self.completer) {
            (PredictorKind::HSeq2Seq, _) => e2e_suffix(&model.params, &model.arch, &x)?,
            (_, Some(c)) => predict_suffix(&model.params, &model.arch, c, &x)?,
            _ => unreachable!("checked by Predictor::check"),
        };
        Ok(pose_columns(&out, model.label_channels()))
    }
}

pub struct EvalOutputs {
    pub table: ErrorTable,
    pub csv: String,
    pub jsonl: String,
}

#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    cfg: &RunConfig,
    dataset: &DatasetArtifact,
    kind: PredictorKind,
    model: Option<&ModelArtifact>,
    completer: Option<&Completer>,
    clips: Option<&Path>,
    data_dir: Option<&Path>,
    out_dir: &Path,
) -> Result<EvalOutputs> {
    let predictor = Predictor { kind, model, completer };
    predictor.check()?;
    let out = if dataset.source == "synthetic" {
        evaluate_synthetic(cfg, dataset, &predictor)?
    } else {
        evaluate_h36m(cfg, dataset, &predictor, clips, data_dir, out_dir)?
    };
    let stem = format!("eval_{}", kind.name().replace('-', "_"));
    write_text(&out_dir.join(format!("{stem}.csv")), &out.csv)?;
    write_text(&out_dir.join(format!("{stem}_clips.jsonl")), &out.jsonl)?;
    Ok(out)
}

fn evaluate_h36m(
    cfg: &RunConfig,
    dataset: &DatasetArtifact,
    predictor: &Predictor,
    clips: Option<&Path>,
    data_dir: Option<&Path>,
    out_dir: &Path,
) -> Result<EvalOutputs> {
    let root = match data_dir {
        Some(d) => d.to_path_buf(),
        None => cfg.resolve_data_dir().unwrap_or_else(|_| PathBuf::from(&dataset.source)),
    };
    let subjects = if dataset.test_subjects.is_empty() { &cfg.test_subjects } else { &dataset.test_subjects };
    let seqs = load_subjects(&root, subjects, cfg)?;
    let selection = match clips {
        Some(p) => ClipSelection::load(p)?,
        None => ClipSelection::reference(&seqs, &cfg.actions)?,
    };
    write_text(&out_dir.join("clips.txt"), &selection.to_text())?;
    let fps = SOURCE_FPS / cfg.downsample as f64;
    let report = evaluate_short_term(
        |clip, x| predictor.predict(x, Some(&clip.action), cfg.output_frames),
        &seqs,
        &selection,
        &dataset.stats,
        cfg.input_frames,
        cfg.output_frames,
        &HORIZONS_MS,
        fps,
    )?;
    Ok(EvalOutputs {
        csv: report.table.to_csv("action"),
        jsonl: report.clips_jsonl(),
        table: report.table,
    })
}

fn evaluate_synthetic(cfg: &RunConfig, dataset: &DatasetArtifact, predictor: &Predictor) -> Result<EvalOutputs> {
    let (arch, j) = match predictor.model {
        Some(m) => (m.arch, predictor.prefix_len().unwrap_or(cfg.j * m.arch.block) / m.arch.block),
        None => (cfg.arch(dataset.test.first().map_or(1, |(_, m)| m.cols()))?, cfg.j),
    };
    let horizons = RunConfig { frames: arch.frames, block: arch.block, j, ..cfg.clone() }.ablation().horizon_frames;
    let labels = dataset.label_channels();
    let mut groups: BTreeMap<String, Vec<Matrix>> = BTreeMap::new();
    for (key, m) in &dataset.test {
        groups.entry(group_of(key)).or_default().push(m.clone());
    }
    let mut table = ErrorTable::new(horizons.iter().map(|h| format!("frame_{h}")).collect());
    let mut jsonl = String::new();
    for (gi, (group, seqs)) in groups.iter().enumerate() {
        let windows = draw_windows(seqs, &arch, j, cfg.test_windows, cfg.seed, 6 + gi as u64)?;
        let windows: Vec<_> = windows
            .into_iter()
            .map(|mut w| {
                w.x = pose_columns(&w.x, labels);
                w.y = pose_columns(&w.y, labels);
                w
            })
            .collect();
        let per = suffix_errors(&windows, &horizons, |x| predictor.predict(x, Some(group), arch.frames))?;
        let n = per.len().max(1) as f64;
        let mean: Vec<f64> = (0..horizons.len()).map(|c| per.iter().map(|r| r[c]).sum::<f64>() / n).collect();
        for (i, e) in per.iter().enumerate() {
            let line = serde_json::json!({ "group": group, "window": i, "horizon_frames": horizons, "errors": e });
            let _ = writeln!(jsonl, "{line}");
        }
        table.push(group.clone(), mean)?;
    }
    Ok(EvalOutputs {
        csv: table.to_csv("group"),
        jsonl,
        table,
    })
}

// ---------------------------------------------------------------- predict / generate / interpolate

fn load_input(path: &Path, model: &ModelArtifact, action: Option<&str>) -> Result<Matrix> {
    let stats = model
        .stats
        .as_ref()
        .ok_or_else(|| Error::arg("model carries no normalization stats"))?;
    let raw = load_expmap_file(path)?;
    with_labels(&stats.forward(&raw.frames)?, model.vocab.as_ref(), action)
}

fn to_raw(model: &ModelArtifact, frames: &Matrix) -> Result<Matrix> {
    let pose = pose_columns(frames, model.label_channels());
    match &model.stats {
        Some(s) => s.inverse(&pose),
        None => Ok(pose),
    }
}

pub struct PredictOptions<'a> {
    pub action: Option<&'a str>,
    pub full: bool,
    pub truth: Option<&'a Path>,
}

pub fn predict(model: &ModelArtifact, completer: &Completer, input: &Path, out: &Path, opts: &PredictOptions) -> Result<Matrix> {
    let x = load_input(input, model, opts.action)?;
    let need = completer.prefix_len();
    if x.rows() < need {
        return Err(Error::arg(format!("input has {} frames, completer needs {need}", x.rows())));
    }
    let x = x.slice_rows(x.rows() - need, x.rows());
    let frames = if opts.full {
        predict_full(&model.params, &model.arch, completer, &x)?
    } else {
        predict_suffix(&model.params, &model.arch, completer, &x)?
    };
    let raw = to_raw(model, &frames)?;
    write_expmap_file(out, &raw)?;
    if let Some(truth) = opts.truth {
        let gt = load_expmap_file(truth)?.frames;
        let n = gt.rows().min(raw.rows());
        let curve = frame_euclidean_errors(&raw.slice_rows(raw.rows() - n, raw.rows()), &gt.slice_rows(0, n))?;
        let mut s = String::from("frame,distance\n");
        for (i, d) in curve.iter().enumerate() {
            let _ = writeln!(s, "{},{d:.6}", i + 1);
        }
        write_text(&out.with_extension("distance.csv"), &s)?;
    }
    Ok(raw)
}

#[allow(clippy::too_many_arguments)]
pub fn generate(
    model: &ModelArtifact,
    completer: &Completer,
    input: &Path,
    action: Option<&str>,
    scale: f64,
    count: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let x = load_input(input, model, action)?;
    let need = completer.prefix_len();
    if x.rows() < need {
        return Err(Error::arg(format!("input has {} frames, completer needs {need}", x.rows())));
    }
    let x = x.slice_rows(x.rows() - need, x.rows());
    ensure_dir(out_dir)?;
    let mut rng = rng_for(seed, 7);
    let mut paths = Vec::with_capacity(count);
    for i in 0..count {
        let frames = generate_noisy(&model.params, &model.arch, completer, &x, scale, &mut rng)?;
        let path = out_dir.join(format!("sample_{i:03}.txt"));
        write_expmap_file(&path, &to_raw(model, &frames)?)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn interpolate_files(
    model: &ModelArtifact,
    a: (&Path, Option<&str>),
    b: (&Path, Option<&str>),
    steps: usize,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let code = |(path, action): (&Path, Option<&str>)| -> Result<LatentCode> {
        let x = load_input(path, model, action)?;
        if x.rows() < model.arch.frames {
            return Err(Error::arg(format!(
                "{} has {} frames, the model encodes {}",
                path.display(),
                x.rows(),
                model.arch.frames
            )));
        }
        model.params.encode_prefix(&model.arch, &x.slice_rows(0, model.arch.frames))
    };
    let seqs = interpolate(&model.params, &model.arch, &code(a)?, &code(b)?, steps)?;
    ensure_dir(out_dir)?;
    seqs.iter()
        .enumerate()
        .map(|(i, frames)| {
            let path = out_dir.join(format!("interp_{i:03}.txt"));
            write_expmap_file(&path, &to_raw(model, frames)?)?;
            Ok(path)
        })
        .collect()
}

// ---------------------------------------------------------------- classify

pub struct ClassifyOutputs {
    pub table: ErrorTable,
    pub csv: String,
}

/// Trains a labelled autoencoder, fits a label completer and scores the
/// probability it assigns to the true class of held-out windows.
pub fn classify(
    cfg: &RunConfig,
    dataset: &DatasetArtifact,
    masked: bool,
    learned: bool,
    out_dir: &Path,
) -> Result<ClassifyOutputs> {
    let vocab = dataset
        .vocab
        .as_ref()
        .ok_or_else(|| Error::Data("classification needs a dataset prepared with labels = true".into()))?;
    let labels = vocab.len();
    let data = matrices(&dataset.train);
    let arch = ArchConfig { variant: Variant::Hs2sae, ..cfg.arch(data.first().map_or(0, Matrix::cols))? };
    let mut tc = cfg.train();
    tc.label_mask_channels = masked.then_some(labels);
    let trained = train_autoencoder(&data, &arch, &tc)?;
    let variant = if masked { "masked" } else { "recovery" };
    ModelArtifact {
        arch,
        params: trained.params.clone(),
        stats: Some(dataset.stats.clone()),
        vocab: Some(vocab.clone()),
    }
    .save(out_dir.join(format!("classify_{variant}_model.hs2s")))?;
    let result = score_classification(&trained.params, &arch, &dataset.train, &dataset.test, vocab, cfg, learned)?;
    let csv = result.to_csv("action");
    write_text(&out_dir.join(format!("classify_{variant}.csv")), &csv)?;
    Ok(ClassifyOutputs { table: result, csv })
}

/// Per class: mean probability of the true class and accuracy on test windows.
pub fn score_classification(
    params: &ModelParams,
    arch: &ArchConfig,
    train: &[(String, Matrix)],
    test: &[(String, Matrix)],
    vocab: &LabelVocab,
    cfg: &RunConfig,
    learned: bool,
) -> Result<ErrorTable> {
    let labels = vocab.len();
    let windows: Vec<Matrix> = draw_windows(&matrices(train), arch, arch.blocks(), cfg.pair_windows, cfg.seed, 5)?
        .into_iter()
        .map(|w| w.full)
        .collect();
    let pairs = label_pairs(params, arch, &windows, labels)?;
    let completer = if learned {
        Completer::Fn(fit_fn(&pairs, &cfg.fn_train())?)
    } else {
        Completer::Add(CompletionVector::from_pairs(&pairs)?)
    };
    let mut table = ErrorTable::new(vec!["true_class_probability".into(), "accuracy".into()]);
    for (class, name) in vocab.names().iter().enumerate() {
        let seqs: Vec<Matrix> = test
            .iter()
            .filter(|(k, _)| group_of(k) == *name)
            .map(|(_, m)| m.clone())
            .collect();
        if seqs.is_empty() {
            continue;
        }
        let windows = draw_windows(&seqs, arch, arch.blocks(), cfg.test_windows, cfg.seed, 8 + class as u64)?;
        let (mut prob, mut hits) = (0.0, 0usize);
        for w in &windows {
            let p = classify_window(params, arch, &completer, &w.full, labels)?;
            prob += p[class];
            let best = p
                .iter()
                .enumerate()
                .fold(0, |b, (i, &v)| if v > p[b] { i } else { b });
            hits += usize::from(best == class);
        }
        let n = windows.len() as f64;
        table.push(name.clone(), vec![prob / n, hits as f64 / n])?;
    }
    Ok(table)
}

// ---------------------------------------------------------------- ablate / report

pub fn ablate(cfg: &RunConfig, dataset: &DatasetArtifact, out_dir: &Path) -> Result<String> {
    let labels = dataset.label_channels();
    let strip = |seqs: &[(String, Matrix)]| -> Vec<Matrix> { seqs.iter().map(|(_, m)| pose_columns(m, labels)).collect() };
    let train = strip(&dataset.train);
    let test = strip(&dataset.test);
    let arch = cfg.arch(train.first().map_or(0, Matrix::cols))?;
    let report = run_ablation(&train, &test, &arch, &cfg.train(), &cfg.ablation())?;
    let csv = report.to_csv();
    write_text(&out_dir.join("ablation.csv"), &csv)?;
    write_text(&out_dir.join("ablation_windows.jsonl"), &report.per_window_jsonl())?;
    Ok(csv)
}

/// Collects every CSV under `dir` into one Markdown document.
pub fn report(dir: &Path) -> Result<String> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Data(format!("no CSV results in {}", dir.display())));
    }
    let mut md = String::from("# Results\n");
    for f in files {
        let text = fs::read_to_string(&f)?;
        let mut lines = text.lines();
        let Some(header) = lines.next() else { continue };
        let _ = writeln!(md, "\n## {}\n", f.file_stem().and_then(|s| s.to_str()).unwrap_or(""));
        let cols = header.split(',').count();
        let _ = writeln!(md, "| {} |", header.replace(',', " | "));
        let _ = writeln!(md, "|{}", "---|".repeat(cols));
        // long per-step histories are summarized by their first and last rows
        let rows: Vec<&str> = lines.collect();
        let shown: Vec<&str> = if rows.len() > 20 {
            rows[..5].iter().chain(&rows[rows.len() - 5..]).copied().collect()
        } else {
            rows
        };
        for r in shown {
            let _ = writeln!(md, "| {} |", r.replace(',', " | "));
        }
    }
    write_text(&dir.join("report.md"), &md)?;
    Ok(md)
}

pub fn load_model(path: &Path) -> Result<ModelArtifact> {
    ModelArtifact::load(path)
}

pub fn load_completer_file(path: &Path) -> Result<Completer> {
    load_completer(path)
}
