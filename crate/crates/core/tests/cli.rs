use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const QUICK: &str = "\
dataset = synthetic
norm = unit_range
synthetic_count = 3
synthetic_test_count = 2
synthetic_length = 60
latent = 8
sub_hidden = 8
dec_hidden = 8
epochs = 1
samples_per_epoch = 32
batch = 16
folds = 2
val_samples = 8
pair_windows = 24
test_windows = 8
fn_epochs = 2
";

fn hs2s(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hs2s"))
        .current_dir(dir)
        .args(["--config", "quick.conf", "--out-dir", "out"])
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = hs2s(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("quick.conf"), QUICK).unwrap();
    dir
}

#[test]
fn usage_errors_exit_with_two() {
    let bin = env!("CARGO_BIN_EXE_hs2s");
    assert_eq!(Command::new(bin).output().unwrap().status.code(), Some(2));
    assert_eq!(Command::new(bin).arg("fly").output().unwrap().status.code(), Some(2));
    let missing = Command::new(bin).args(["train-ae", "--dataset", "/nonexistent/x.hs2s"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error kind=io: "));
}

#[test]
fn bad_override_is_a_config_error() {
    let dir = workspace();
    let out = hs2s(dir.path(), &["--set", "no_such_key=1", "prepare-data", "--synthetic"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error kind=config: "));
}

#[test]
fn corrupt_checkpoint_reports_its_kind() {
    let dir = workspace();
    ok(dir.path(), &["prepare-data", "--synthetic"]);
    let path = dir.path().join("out/dataset.hs2s");
    let mut bytes = fs::read(&path).unwrap();
    let n = bytes.len();
    bytes.truncate(n / 2);
    fs::write(&path, bytes).unwrap();
    let out = hs2s(dir.path(), &["train-ae", "--dataset", "out/dataset.hs2s"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error kind=corruption: "));
}

#[test]
fn pipeline_end_to_end() {
    let dir = workspace();
    let d = dir.path();
    ok(d, &["prepare-data", "--synthetic"]);
    ok(d, &["train-ae", "--dataset", "out/dataset.hs2s"]);
    assert!(fs::read_to_string(d.join("out/history.csv")).unwrap().starts_with("step,loss\n"));
    ok(d, &["fit-completion", "--model", "out/model.hs2s", "--dataset", "out/dataset.hs2s", "--mode", "add", "--j", "2"]);
    ok(d, &["fit-completion", "--model", "out/model.hs2s", "--dataset", "out/dataset.hs2s", "--mode", "fn", "--j", "2"]);
    let add = "out/completer_add_completion_j2.hs2s";
    let fnc = "out/completer_fn_completion_j2.hs2s";

    let zv = ok(d, &["evaluate", "--predictor", "zero-velocity", "--dataset", "out/dataset.hs2s"]);
    assert!(zv.lines().last().unwrap().starts_with("Average,"));
    let e = ok(d, &["evaluate", "--predictor", "fn", "--dataset", "out/dataset.hs2s", "--model", "out/model.hs2s", "--completer", fnc]);
    assert_eq!(e.lines().next(), zv.lines().next());

    let frames: String = (0..10)
        .map(|t| (0..8).map(|c| format!("{}", ((t * 8 + c) as f64 * 0.1).sin())).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(d.join("x.txt"), &frames).unwrap();
    ok(d, &["predict", "--model", "out/model.hs2s", "--completer", add, "--input", "x.txt", "--out", "out/pred.txt"]);
    assert_eq!(fs::read_to_string(d.join("out/pred.txt")).unwrap().lines().count(), 10);
    ok(d, &["generate", "--model", "out/model.hs2s", "--completer", add, "--input", "x.txt", "--count", "2"]);
    assert!(d.join("out/sample_001.txt").exists());

    let whole: String = frames.repeat(2);
    fs::write(d.join("a.txt"), &whole).unwrap();
    fs::write(d.join("b.txt"), whole.replace('-', "")).unwrap();
    ok(d, &["interpolate", "--model", "out/model.hs2s", "--input-a", "a.txt", "--input-b", "b.txt", "--steps", "4"]);
    assert!(d.join("out/interp_004.txt").exists() && !d.join("out/interp_005.txt").exists());

    fs::write(d.join("short.txt"), frames.lines().take(4).collect::<Vec<_>>().join("\n")).unwrap();
    let bad = hs2s(d, &["predict", "--model", "out/model.hs2s", "--completer", add, "--input", "short.txt", "--out", "o.txt"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error kind=argument: "));

    let report = ok(d, &["report"]);
    assert!(report.contains("zero_velocity"));
    assert!(d.join("out/report.md").exists());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = hs2s::cli::RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.arch(cfg.synthetic_channels).unwrap().validate().unwrap();
        cfg.train().validate().unwrap();
        assert!(cfg.j * cfg.block < cfg.frames, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 4);
}
