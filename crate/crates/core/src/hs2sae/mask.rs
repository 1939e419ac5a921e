use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ndmath::Matrix;

/// Which part of a labelled window was hidden from the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    Label,
    Pose,
    None,
}

/// Masks a batch in thirds: label channels zeroed, pose channels zeroed, untouched.
///
/// The last `label_channels` columns of every window are the label. When the
/// batch size is not a multiple of three the remainder stays untouched.
pub fn mask_for_classification<R: Rng + ?Sized>(
    batch: &[Matrix],
    label_channels: usize,
    rng: &mut R,
) -> Result<Vec<(Matrix, MaskKind)>> {
    if label_channels == 0 {
        return Err(Error::arg("masking needs at least one label channel"));
    }
    if let Some(m) = batch.iter().find(|m| m.cols() <= label_channels) {
        return Err(Error::shape(format!(
            "window has {} channels, needs more than {label_channels} label channels",
            m.cols()
        )));
    }
    let mut order: Vec<usize> = (0..batch.len()).collect();
    order.shuffle(rng);
    let third = batch.len() / 3;
    let mut kinds = vec![MaskKind::None; batch.len()];
    for (rank, &i) in order.iter().enumerate() {
        kinds[i] = match rank.checked_div(third) {
            Some(0) => MaskKind::Label,
            Some(1) => MaskKind::Pose,
            _ => MaskKind::None,
        };
    }
    Ok(batch
        .iter()
        .zip(kinds)
        .map(|(m, kind)| {
            let mut out = m.clone();
            let pose = m.cols() - label_channels;
            let cols = match kind {
                MaskKind::Label => pose..m.cols(),
                MaskKind::Pose => 0..pose,
                MaskKind::None => 0..0,
            };
            for t in 0..out.rows() {
                out.row_mut(t)[cols.clone()].iter_mut().for_each(|v| *v = 0.0);
            }
            (out, kind)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn thirds_are_exact() {
        let batch: Vec<Matrix> = (0..9).map(|i| Matrix::from_vec(2, 3, vec![1.0 + i as f64; 6]).unwrap()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = mask_for_classification(&batch, 1, &mut rng).unwrap();
        let count = |k| out.iter().filter(|(_, m)| *m == k).count();
        assert_eq!((count(MaskKind::Label), count(MaskKind::Pose), count(MaskKind::None)), (3, 3, 3));
        for ((m, kind), orig) in out.iter().zip(&batch) {
            for t in 0..2 {
                let r = m.row(t);
                match kind {
                    MaskKind::Label => assert_eq!(r, &[orig.get(t, 0), orig.get(t, 1), 0.0]),
                    MaskKind::Pose => assert_eq!(r, &[0.0, 0.0, orig.get(t, 2)]),
                    MaskKind::None => assert_eq!(r, orig.row(t)),
                }
            }
        }
    }

    #[test]
    fn requires_label_channels() {
        let batch = vec![Matrix::zeros(2, 3)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(mask_for_classification(&batch, 0, &mut rng).is_err());
        assert!(mask_for_classification(&batch, 3, &mut rng).is_err());
    }
}
