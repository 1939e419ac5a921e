//! Deterministic sinusoidal motion used as a small stand-in dataset.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sequence::MotionSequence;
use crate::error::{Error, Result};
use crate::ndmath::Matrix;

pub const SYNTH_FPS: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthFamily {
    SineWalk,
    SineSit,
}

/// Parameter ranges of one family: channel `c` is `A·sin(2π f t + φ) + b`.
#[derive(Debug, Clone, Copy)]
pub struct FamilyRanges {
    pub amplitude: (f64, f64),
    pub frequency_hz: (f64, f64),
    pub offset: (f64, f64),
}

impl SynthFamily {
    pub const ALL: [SynthFamily; 2] = [SynthFamily::SineWalk, SynthFamily::SineSit];

    pub fn ranges(self) -> FamilyRanges {
        match self {
            SynthFamily::SineWalk => FamilyRanges {
                amplitude: (0.4, 1.0),
                frequency_hz: (1.2, 2.0),
                offset: (-0.5, 0.5),
            },
            SynthFamily::SineSit => FamilyRanges {
                amplitude: (0.4, 1.0),
                frequency_hz: (0.25, 0.6),
                offset: (-0.5, 0.5),
            },
        }
    }

    /// Largest absolute value any sample of this family can take.
    pub fn bound(self) -> f64 {
        let r = self.ranges();
        r.amplitude.1 + r.offset.0.abs().max(r.offset.1.abs())
    }

    pub fn name(self) -> &'static str {
        match self {
            SynthFamily::SineWalk => "sine_walk",
            SynthFamily::SineSit => "sine_sit",
        }
    }

    fn stream(self) -> u64 {
        match self {
            SynthFamily::SineWalk => 0x5749_4e45_5741_4c4b,
            SynthFamily::SineSit => 0x5349_4e45_5349_5421,
        }
    }
}

impl std::str::FromStr for SynthFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine_walk" => Ok(SynthFamily::SineWalk),
            "sine_sit" => Ok(SynthFamily::SineSit),
            other => Err(Error::arg(format!("unknown synthetic family `{other}`"))),
        }
    }
}

/// Generates one sequence; identical arguments give identical output.
pub fn synth_motion(family: SynthFamily, channels: usize, length: usize, seed: u64) -> Result<MotionSequence> {
    if channels == 0 || length == 0 {
        return Err(Error::arg("synthetic motion needs at least one channel and one frame"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(family.stream());
    let r = family.ranges();
    let params: Vec<(f64, f64, f64, f64)> = (0..channels)
        .map(|_| {
            (
                rng.random_range(r.amplitude.0..=r.amplitude.1),
                rng.random_range(r.frequency_hz.0..=r.frequency_hz.1),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(r.offset.0..=r.offset.1),
            )
        })
        .collect();
    let mut frames = Matrix::zeros(length, channels);
    for t in 0..length {
        let secs = t as f64 / SYNTH_FPS;
        for (c, &(a, f, phi, b)) in params.iter().enumerate() {
            frames.set(t, c, a * (2.0 * PI * f * secs + phi).sin() + b);
        }
    }
    let mut seq = MotionSequence::new(frames, SYNTH_FPS)?;
    seq.action = Some(family.name().to_string());
    seq.take = Some(seed as u32);
    Ok(seq)
}

/// `count` sequences per family, seeds derived from `seed`; walk first, then sit.
pub fn synth_dataset(
    families: &[SynthFamily],
    count: usize,
    channels: usize,
    length: usize,
    seed: u64,
) -> Result<Vec<MotionSequence>> {
    let mut out = Vec::with_capacity(families.len() * count);
    for &fam in families {
        for i in 0..count {
            out.push(synth_motion(fam, channels, length, seed.wrapping_mul(1_000_003).wrapping_add(i as u64))?);
        }
    }
    Ok(out)
}
