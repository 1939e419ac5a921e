use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndmath::Matrix;

/// Native frame rate of the exponential-map distribution.
pub const SOURCE_FPS: f64 = 50.0;

/// Frames × channels of joint angles (exponential-map triples; channels 0–2
/// global translation, 3–5 global rotation) plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionSequence {
    pub frames: Matrix,
    pub fps: f64,
    pub action: Option<String>,
    pub subject: Option<u32>,
    /// Index parsed from `<action>_<index>.txt`.
    pub take: Option<u32>,
}

impl MotionSequence {
    pub fn new(frames: Matrix, fps: f64) -> Result<Self> {
        if !(fps > 0.0) {
            return Err(Error::arg(format!("fps must be positive, got {fps}")));
        }
        if !frames.is_finite() {
            return Err(Error::Data("non-finite value in motion frames".into()));
        }
        Ok(Self {
            frames,
            fps,
            action: None,
            subject: None,
            take: None,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.rows() == 0
    }

    pub fn channels(&self) -> usize {
        self.frames.cols()
    }

    /// `S<subject>/<action>_<take>` when all parts are known.
    pub fn key(&self) -> Option<String> {
        Some(format!(
            "S{}/{}_{}",
            self.subject?,
            self.action.as_deref()?,
            self.take?
        ))
    }
}

/// Parses `S<k>/<action>_<idx>.txt` into (subject, action, idx); missing parts are `None`.
pub fn parse_path_convention(path: &Path) -> (Option<u32>, Option<String>, Option<u32>) {
    let subject = path
        .parent()
        .and_then(|p| p.file_name())
        .and_then(|s| s.to_str())
        .and_then(|s| s.strip_prefix('S'))
        .and_then(|s| s.parse().ok());
    let stem = path.file_stem().and_then(|s| s.to_str());
    let (action, take) = match stem.and_then(|s| s.rsplit_once('_')) {
        Some((a, i)) => match i.parse() {
            Ok(i) => (Some(a.to_string()), Some(i)),
            Err(_) => (stem.map(str::to_string), None),
        },
        None => (stem.map(str::to_string), None),
    };
    (subject, action, take)
}

/// Reads one comma-separated exponential-map file (one frame per line).
pub fn load_expmap_file(path: impl AsRef<Path>) -> Result<MotionSequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let frames = parse_expmap_text(&text, path)?;
    let mut seq = MotionSequence::new(frames, SOURCE_FPS)?;
    let (subject, action, take) = parse_path_convention(path);
    seq.subject = subject;
    seq.action = action;
    seq.take = take;
    Ok(seq)
}

pub(crate) fn parse_expmap_text(text: &str, path: &Path) -> Result<Matrix> {
    let fmt_err = |line: usize, msg: String| Error::Format {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut data = Vec::new();
    let mut channels: Option<usize> = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split(',') {
            let tok = tok.trim();
            let v: f64 = tok
                .parse()
                .map_err(|_| fmt_err(i + 1, format!("non-numeric token `{tok}`")))?;
            if !v.is_finite() {
                return Err(fmt_err(i + 1, format!("non-finite value `{tok}`")));
            }
            data.push(v);
        }
        let n = data.len() - before;
        match channels {
            None => channels = Some(n),
            Some(c) if c != n => {
                return Err(fmt_err(i + 1, format!("{n} channels, expected {c}")));
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = channels.ok_or_else(|| fmt_err(0, "empty file".into()))?;
    Matrix::from_vec(rows, cols, data)
}

/// Writes frames in the same comma-separated, frame-per-line format.
pub fn write_expmap_file(path: impl AsRef<Path>, frames: &Matrix) -> Result<()> {
    let mut out = String::new();
    for row in frames.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Keeps frames `0, factor, 2·factor, …` and divides the frame rate.
pub fn downsample(seq: &MotionSequence, factor: usize) -> Result<MotionSequence> {
    if factor == 0 {
        return Err(Error::arg("downsample factor must be at least 1"));
    }
    let rows: Vec<Vec<f64>> = (0..seq.len())
        .step_by(factor)
        .map(|r| seq.frames.row(r).to_vec())
        .collect();
    Ok(MotionSequence {
        frames: Matrix::from_rows(&rows, seq.channels())?,
        fps: seq.fps / factor as f64,
        action: seq.action.clone(),
        subject: seq.subject,
        take: seq.take,
    })
}

/// Lists `S<k>/*.txt` under `root` for the requested subjects, sorted by path.
pub fn list_dataset_files(root: &Path, subjects: &[u32]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for s in subjects {
        let dir = root.join(format!("S{s}"));
        if !dir.is_dir() {
            return Err(Error::Data(format!("missing subject directory {}", dir.display())));
        }
        for entry in fs::read_dir(&dir)? {
            let p = entry?.path();
            if p.extension().and_then(|e| e.to_str()) == Some("txt") {
                files.push(p);
            }
        }
    }
    files.sort();
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_line_file() {
        let m = parse_expmap_text("0,0,0\n1,2,3\n", Path::new("x.txt")).unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m.row(1), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn empty_file_is_format_error() {
        assert!(matches!(
            parse_expmap_text("", Path::new("x.txt")),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn ragged_rows_report_line() {
        match parse_expmap_text("1,2,3\n1,2\n", Path::new("x.txt")) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_token() {
        match parse_expmap_text("1,2,3\n1,a,3\n", Path::new("x.txt")) {
            Err(Error::Format { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("`a`"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn path_convention() {
        let (s, a, i) = parse_path_convention(Path::new("/data/S5/walking_1.txt"));
        assert_eq!((s, a.as_deref(), i), (Some(5), Some("walking"), Some(1)));
    }

    #[test]
    fn load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let sdir = dir.path().join("S7");
        fs::create_dir(&sdir).unwrap();
        let p = sdir.join("eating_2.txt");
        fs::write(&p, "0.1,0.2\n0.3,0.4\n0.5,0.6\n").unwrap();
        let seq = load_expmap_file(&p).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.fps, 50.0);
        assert_eq!(seq.key().as_deref(), Some("S7/eating_2"));
        assert_eq!(list_dataset_files(dir.path(), &[7]).unwrap(), vec![p]);
    }

    #[test]
    fn downsample_cases() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let seq = MotionSequence::new(Matrix::from_rows(&rows, 1).unwrap(), 50.0).unwrap();
        assert_eq!(downsample(&seq, 1).unwrap(), seq);
        let half = downsample(&seq, 2).unwrap();
        assert_eq!(half.frames.data(), &[0.0, 2.0, 4.0, 6.0, 8.0]);
        assert_eq!(half.fps, 25.0);
        assert!(downsample(&seq, 0).is_err());
    }
}
