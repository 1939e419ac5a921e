//! Command-line surface, run configuration and artifact persistence.

mod bundle;
mod checkpoint;
pub mod commands;
mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub use bundle::{
    completer_from_container, completer_to_container, load_completer, save_completer, variant_from_name,
    DatasetArtifact, ModelArtifact,
};
pub use checkpoint::{join_f64, split_f64, Block, Container, FORMAT_VERSION, MAGIC};
pub use config::{RunConfig, DATA_DIR_ENV};

use crate::completion::CompletionMode;
use crate::error::{Error, Result};
use commands::{PredictOptions, PredictorKind};

#[derive(Debug, Parser)]
#[command(name = "hs2s", version, about = "Motion autoencoder with latent pattern completion")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Run configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed; governs all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides one configuration key, e.g. `--set epochs=5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (defaults to the configured one).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Add,
    Fn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Completion,
    Matching,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PredictorArg {
    ZeroVelocity,
    Add,
    Fn,
    HSeq2seq,
    Basic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassifyArg {
    Masked,
    Recovery,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest raw or synthetic motion, compute normalization stats and cache the result.
    PrepareData {
        /// Generate the synthetic families instead of reading files.
        #[arg(long)]
        synthetic: bool,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Dataset artifact path (default `<out-dir>/dataset.hs2s`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the autoencoder on a prepared dataset.
    TrainAe {
        #[arg(long)]
        dataset: PathBuf,
        /// Model artifact path (default `<out-dir>/model.hs2s`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a latent completer for prefix index `j`.
    FitCompletion {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "completion")]
        target: TargetArg,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a predictor on held-out data.
    Evaluate {
        #[arg(long, value_enum)]
        predictor: PredictorArg,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        completer: Option<PathBuf>,
        /// Explicit clip list (`action,subject,take,split` lines).
        #[arg(long)]
        clips: Option<PathBuf>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Predict the continuation of a motion file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        completer: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Action label for models trained with labels.
        #[arg(long)]
        action: Option<String>,
        /// Write all decoded frames instead of the continuation only.
        #[arg(long)]
        full: bool,
        /// Ground-truth continuation; writes a per-frame distance curve.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Sample continuations with noise scaled by the completer's sigma.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        completer: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        action: Option<String>,
        #[arg(long)]
        noise_scale: Option<f64>,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Decode evenly spaced codes between two motion files.
    Interpolate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input_a: PathBuf,
        #[arg(long)]
        input_b: PathBuf,
        #[arg(long)]
        action_a: Option<String>,
        #[arg(long)]
        action_b: Option<String>,
        #[arg(long)]
        steps: usize,
    },
    /// Train a labelled model and report class probabilities on held-out windows.
    Classify {
        #[arg(long, value_enum)]
        variant: ClassifyArg,
        #[arg(long)]
        dataset: PathBuf,
        /// Label completer type.
        #[arg(long, value_enum, default_value = "fn")]
        completer: ModeArg,
    },
    /// Train and score every ablation configuration.
    Ablate {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Collect result tables from the output directory into report.md.
    Report {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {o:?} is not KEY=VALUE")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.output_dir = d.clone();
    }
    Ok(cfg)
}

fn or_default(p: &Option<PathBuf>, dir: &Path, name: &str) -> PathBuf {
    p.clone().unwrap_or_else(|| dir.join(name))
}

fn execute(cli: &Cli) -> Result<()> {
    let mut cfg = run_config(cli)?;
    let out = cfg.output_dir.clone();
    match &cli.command {
        Command::PrepareData { synthetic, data_dir, out: path } => {
            if let Some(d) = data_dir {
                cfg.data_dir = d.display().to_string();
            }
            let path = or_default(path, &out, "dataset.hs2s");
            let art = commands::prepare_data(&cfg, *synthetic, &path)?;
            println!(
                "wrote {} ({} train, {} test sequences, {} channels kept)",
                path.display(),
                art.train.len(),
                art.test.len(),
                art.stats.kept_channels()
            );
        }
        Command::TrainAe { dataset, out: path } => {
            let ds = DatasetArtifact::load(dataset)?;
            let path = or_default(path, &out, "model.hs2s");
            commands::train_ae(&cfg, &ds, &path, &out)?;
            println!("wrote {}", path.display());
        }
        Command::FitCompletion { model, dataset, mode, target, j, out: path } => {
            let m = ModelArtifact::load(model)?;
            let ds = DatasetArtifact::load(dataset)?;
            let target = match target {
                TargetArg::Completion => CompletionMode::Completion,
                TargetArg::Matching => CompletionMode::Matching,
            };
            let learned = matches!(mode, ModeArg::Fn);
            let name = format!("completer_{}_{}_j{j}.hs2s", if learned { "fn" } else { "add" }, target);
            let path = or_default(path, &out, &name);
            commands::fit_completion(&cfg, &m, &ds, learned, target, *j, &path)?;
            println!("wrote {}", path.display());
        }
        Command::Evaluate { predictor, dataset, model, completer, clips, data_dir } => {
            let kind = match predictor {
                PredictorArg::ZeroVelocity => PredictorKind::ZeroVelocity,
                PredictorArg::Add => PredictorKind::Add,
                PredictorArg::Fn => PredictorKind::Fn,
                PredictorArg::HSeq2seq => PredictorKind::HSeq2Seq,
                PredictorArg::Basic => PredictorKind::Basic,
            };
            let ds = DatasetArtifact::load(dataset)?;
            let m = model.as_deref().map(ModelArtifact::load).transpose()?;
            let c = completer.as_deref().map(load_completer).transpose()?;
            let res = commands::evaluate(
                &cfg,
                &ds,
                kind,
                m.as_ref(),
                c.as_ref(),
                clips.as_deref(),
                data_dir.as_deref(),
                &out,
            )?;
            print!("{}", res.csv);
        }
        Command::Predict { model, completer, input, out: path, action, full, truth } => {
            let m = ModelArtifact::load(model)?;
            let c = load_completer(completer)?;
            let opts = PredictOptions { action: action.as_deref(), full: *full, truth: truth.as_deref() };
            let frames = commands::predict(&m, &c, input, path, &opts)?;
            println!("wrote {} ({} frames)", path.display(), frames.rows());
        }
        Command::Generate { model, completer, input, action, noise_scale, count } => {
            let m = ModelArtifact::load(model)?;
            let c = load_completer(completer)?;
            let scale = noise_scale.unwrap_or(cfg.noise_scale);
            let files = commands::generate(&m, &c, input, action.as_deref(), scale, *count, cfg.seed, &out)?;
            println!("wrote {} samples to {}", files.len(), out.display());
        }
        Command::Interpolate { model, input_a, input_b, action_a, action_b, steps } => {
            let m = ModelArtifact::load(model)?;
            let files = commands::interpolate_files(
                &m,
                (input_a, action_a.as_deref()),
                (input_b, action_b.as_deref()),
                *steps,
                &out,
            )?;
            println!("wrote {} sequences to {}", files.len(), out.display());
        }
        Command::Classify { variant, dataset, completer } => {
            let ds = DatasetArtifact::load(dataset)?;
            let res = commands::classify(
                &cfg,
                &ds,
                matches!(variant, ClassifyArg::Masked),
                matches!(completer, ModeArg::Fn),
                &out,
            )?;
            print!("{}", res.csv);
        }
        Command::Ablate { dataset } => {
            let ds = DatasetArtifact::load(dataset)?;
            print!("{}", commands::ablate(&cfg, &ds, &out)?);
        }
        Command::Report { dir } => {
            let dir = dir.clone().unwrap_or(out);
            print!("{}", commands::report(&dir)?);
        }
    }
    Ok(())
}

/// Parses `argv` and runs the subcommand; returns the process exit code.
///
/// Usage errors exit with 2; data and model errors print one line of the
/// form `error kind=<kind>: <message>` to stderr and exit with 1.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error kind={}: {msg}", e.kind());
            1
        }
    }
}
