use std::fs;
use std::path::Path;

use rand::Rng;
use rand_mt::Mt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs2sae::rng_for;
use crate::motiondata::MotionSequence;

/// Seed, subject and offsets of the community-standard test clip draw.
pub const REFERENCE_SEED: u32 = 1_234_567_890;
pub const REFERENCE_SUBJECT: u32 = 5;
pub const CLIPS_PER_ACTION: usize = 8;
const REFERENCE_LEAD: usize = 50;
const REFERENCE_TAIL: usize = 100;
const REFERENCE_MIN_START: usize = 16;

/// One held-out clip: input ends at frame `split - 1`, prediction starts at `split`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clip {
    pub action: String,
    pub subject: u32,
    pub take: u32,
    pub split: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipSelection {
    /// Seed that produced the clips; `None` when loaded from a list.
    pub seed: Option<u64>,
    pub clips: Vec<Clip>,
}

/// `randint(low, high)` of a legacy NumPy generator: masked rejection
/// sampling on 32-bit Mersenne Twister output.
fn legacy_randint(mt: &mut Mt, low: usize, high: usize) -> Result<usize> {
    if high <= low {
        return Err(Error::Selection(format!("empty range [{low}, {high})")));
    }
    let span = (high - 1 - low) as u64;
    if span > u32::MAX as u64 {
        return Err(Error::Selection(format!("range [{low}, {high}) too wide")));
    }
    if span == 0 {
        return Ok(low);
    }
    let mask = u64::MAX >> span.leading_zeros();
    loop {
        let v = mt.next_u32() as u64 & mask;
        if v <= span {
            return Ok(low + v as usize);
        }
    }
}

pub(crate) fn find_sequence<'a>(seqs: &'a [MotionSequence], action: &str, subject: u32, take: u32) -> Option<&'a MotionSequence> {
    seqs.iter()
        .find(|s| s.action.as_deref() == Some(action) && s.subject == Some(subject) && s.take == Some(take))
}

impl ClipSelection {
    /// The standard draw: per action a fresh generator, alternating takes 1 and 2
    /// of subject 5, four clips each.
    pub fn reference<S: AsRef<str>>(seqs: &[MotionSequence], actions: &[S]) -> Result<Self> {
        let mut clips = Vec::with_capacity(actions.len() * CLIPS_PER_ACTION);
        for action in actions {
            let action = action.as_ref();
            let len = |take| {
                find_sequence(seqs, action, REFERENCE_SUBJECT, take)
                    .map(MotionSequence::len)
                    .ok_or_else(|| {
                        Error::Selection(format!("missing S{REFERENCE_SUBJECT}/{action}_{take}"))
                    })
            };
            let lengths = [len(1)?, len(2)?];
            let mut mt = Mt::new(REFERENCE_SEED);
            for i in 0..CLIPS_PER_ACTION {
                let take = (i % 2) as u32 + 1;
                let high = lengths[i % 2].saturating_sub(REFERENCE_LEAD + REFERENCE_TAIL);
                let idx = legacy_randint(&mut mt, REFERENCE_MIN_START, high)?;
                clips.push(Clip {
                    action: action.to_string(),
                    subject: REFERENCE_SUBJECT,
                    take,
                    split: idx + REFERENCE_LEAD,
                });
            }
        }
        Ok(Self {
            seed: Some(REFERENCE_SEED as u64),
            clips,
        })
    }

    /// Uniform draw of `per_action` clips per action from every take of `subject`.
    pub fn seeded<S: AsRef<str>>(
        seqs: &[MotionSequence],
        actions: &[S],
        subject: u32,
        seed: u64,
        per_action: usize,
        input_frames: usize,
        output_frames: usize,
    ) -> Result<Self> {
        let mut rng = rng_for(seed, 4);
        let mut clips = Vec::new();
        for action in actions {
            let action = action.as_ref();
            let mut takes: Vec<&MotionSequence> = seqs
                .iter()
                .filter(|s| {
                    s.action.as_deref() == Some(action)
                        && s.subject == Some(subject)
                        && s.len() >= input_frames + output_frames
                })
                .collect();
            takes.sort_by_key(|s| s.take);
            if takes.is_empty() {
                return Err(Error::Selection(format!(
                    "no S{subject}/{action} take holds {} frames",
                    input_frames + output_frames
                )));
            }
            for i in 0..per_action {
                let s = takes[i % takes.len()];
                let split = rng.random_range(input_frames..=s.len() - output_frames);
                clips.push(Clip {
                    action: action.to_string(),
                    subject,
                    take: s.take.unwrap_or(0),
                    split,
                });
            }
        }
        Ok(Self { seed: Some(seed), clips })
    }

    /// Parses `action,subject,take,split` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut clips = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Selection(format!("line {}: expected action,subject,take,split", n + 1));
            if f.len() != 4 || f[0].is_empty() {
                return Err(bad());
            }
            clips.push(Clip {
                action: f[0].to_string(),
                subject: f[1].trim_start_matches('S').parse().map_err(|_| bad())?,
                take: f[2].parse().map_err(|_| bad())?,
                split: f[3].parse().map_err(|_| bad())?,
            });
        }
        Ok(Self { seed: None, clips })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# action,subject,take,split\n");
        for c in &self.clips {
            out.push_str(&format!("{},{},{},{}\n", c.action, c.subject, c.take, c.split));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Actions in first-appearance order.
    pub fn actions(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.clips {
            if !out.contains(&c.action) {
                out.push(c.action.clone());
            }
        }
        out
    }

    /// Checks that every clip's input and output windows exist.
    pub fn validate(&self, seqs: &[MotionSequence], input_frames: usize, output_frames: usize) -> Result<()> {
        for c in &self.clips {
            let s = find_sequence(seqs, &c.action, c.subject, c.take).ok_or_else(|| {
                Error::Selection(format!("clip refers to missing S{}/{}_{}", c.subject, c.action, c.take))
            })?;
            if c.split < input_frames || c.split + output_frames > s.len() {
                return Err(Error::Selection(format!(
                    "clip S{}/{}_{} at {} needs frames [{}, {}) of {}",
                    c.subject,
                    c.action,
                    c.take,
                    c.split,
                    c.split as i64 - input_frames as i64,
                    c.split + output_frames,
                    s.len()
                )));
            }
        }
        Ok(())
    }
}
