use rand::Rng;

use crate::error::{Error, Result};
use crate::ndmath::Matrix;

/// A length-`T` window split at `jτ` into observed prefix and unseen suffix.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWindow {
    pub x: Matrix,
    pub y: Matrix,
    pub full: Matrix,
    pub j: usize,
    pub start: usize,
}

impl SampleWindow {
    /// Splits `full` (length `T`) after `j·block` frames.
    pub fn from_full(full: Matrix, j: usize, block: usize, start: usize) -> Result<Self> {
        let split = j * block;
        if j == 0 || split > full.rows() {
            return Err(Error::arg(format!(
                "prefix {j}×{block} does not fit a window of {}",
                full.rows()
            )));
        }
        Ok(Self {
            x: full.slice_rows(0, split),
            y: full.slice_rows(split, full.rows()),
            full,
            j,
            start,
        })
    }
}

fn check_window_args(len: usize, total: usize, j: usize, block: usize) -> Result<()> {
    if block == 0 || total == 0 || !total.is_multiple_of(block) {
        return Err(Error::arg(format!("block {block} must divide window length {total}")));
    }
    if j == 0 || j > total / block {
        return Err(Error::arg(format!("prefix index {j} outside 1..={}", total / block)));
    }
    if len < total {
        return Err(Error::arg(format!("sequence of {len} frames is shorter than {total}")));
    }
    Ok(())
}

/// Draws a uniformly random window of `total` frames. Consumes exactly one
/// value from `rng`, even when the start is forced.
pub fn window_sample<R: Rng + ?Sized>(
    frames: &Matrix,
    total: usize,
    j: usize,
    block: usize,
    rng: &mut R,
) -> Result<SampleWindow> {
    check_window_args(frames.rows(), total, j, block)?;
    let choices = frames.rows() - total + 1;
    let u: f64 = rng.random();
    let start = ((u * choices as f64) as usize).min(choices - 1);
    window_at(frames, total, j, block, start)
}

/// Deterministic window starting at `start`.
pub fn window_at(frames: &Matrix, total: usize, j: usize, block: usize, start: usize) -> Result<SampleWindow> {
    check_window_args(frames.rows(), total, j, block)?;
    if start + total > frames.rows() {
        return Err(Error::arg(format!(
            "window [{start}, {}) exceeds {} frames",
            start + total,
            frames.rows()
        )));
    }
    SampleWindow::from_full(frames.slice_rows(start, start + total), j, block, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ramp(n: usize) -> Matrix {
        Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn forced_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = window_sample(&ramp(8), 8, 2, 2, &mut rng).unwrap();
        assert_eq!(w.start, 0);
        assert_eq!(w.x.rows(), 4);
        assert_eq!(w.y.rows(), 4);
    }

    #[test]
    fn complete_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = window_sample(&ramp(30), 8, 4, 2, &mut rng).unwrap();
        assert_eq!(w.x, w.full);
        assert_eq!(w.y.rows(), 0);
    }

    #[test]
    fn deterministic_and_one_draw() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let wa = window_sample(&ramp(100), 10, 1, 5, &mut a).unwrap();
        let wb = window_sample(&ramp(100), 10, 1, 5, &mut b).unwrap();
        assert_eq!(wa, wb);
        let mut c = ChaCha8Rng::seed_from_u64(9);
        let _: f64 = c.random();
        assert_eq!(a.random::<u64>(), c.random::<u64>());
        // forced start still consumes one draw
        let mut d = ChaCha8Rng::seed_from_u64(4);
        let mut e = ChaCha8Rng::seed_from_u64(4);
        window_sample(&ramp(10), 10, 1, 5, &mut d).unwrap();
        let _: f64 = e.random();
        assert_eq!(d.random::<u64>(), e.random::<u64>());
    }

    #[test]
    fn argument_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(window_sample(&ramp(5), 8, 1, 2, &mut rng).is_err());
        assert!(window_sample(&ramp(20), 8, 5, 2, &mut rng).is_err());
        assert!(window_sample(&ramp(20), 9, 1, 2, &mut rng).is_err());
        assert!(window_sample(&ramp(20), 8, 0, 2, &mut rng).is_err());
    }
}
