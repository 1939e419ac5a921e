use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndmath::Matrix;

/// The fifteen Human3.6M action names in their conventional order.
pub const H36M_ACTIONS: [&str; 15] = [
    "walking",
    "eating",
    "smoking",
    "discussion",
    "directions",
    "greeting",
    "phoning",
    "posing",
    "purchases",
    "sitting",
    "sittingdown",
    "takingphoto",
    "waiting",
    "walkingdog",
    "walkingtogether",
];

/// Bijection between action names and one-hot indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelVocab {
    names: Vec<String>,
}

/// Which one-hot block to append to each frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelId {
    Class(usize),
    /// All-zero label block.
    Masked,
}

impl LabelVocab {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::arg(format!("duplicate action name `{n}`")));
            }
        }
        Ok(Self { names })
    }

    pub fn h36m() -> Self {
        Self::new(&H36M_ACTIONS).expect("static vocabulary is unique")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn one_hot(&self, label: LabelId) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.len()];
        match label {
            LabelId::Masked => {}
            LabelId::Class(i) if i < self.len() => v[i] = 1.0,
            LabelId::Class(i) => {
                return Err(Error::arg(format!(
                    "label {i} outside a vocabulary of {}",
                    self.len()
                )))
            }
        }
        Ok(v)
    }
}

/// Appends the label block (`vocab.len()` channels) to every frame.
pub fn append_label(frames: &Matrix, label: LabelId, vocab: &LabelVocab) -> Result<Matrix> {
    let block = vocab.one_hot(label)?;
    let cols = frames.cols() + block.len();
    let mut out = Matrix::zeros(frames.rows(), cols);
    for r in 0..frames.rows() {
        let dst = out.row_mut(r);
        dst[..frames.cols()].copy_from_slice(frames.row(r));
        dst[frames.cols()..].copy_from_slice(&block);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h36m_sizes() {
        let v = LabelVocab::h36m();
        let out = append_label(&Matrix::zeros(3, 54), LabelId::Class(0), &v).unwrap();
        assert_eq!(out.cols(), 69);
        assert_eq!(out.get(2, 54), 1.0);
        assert_eq!(v.index_of("sitting"), Some(9));
    }

    #[test]
    fn masked_block_is_zero() {
        let v = LabelVocab::new(&["a", "b"]).unwrap();
        let f = Matrix::from_vec(1, 2, vec![0.5, 0.7]).unwrap();
        let out = append_label(&f, LabelId::Masked, &v).unwrap();
        assert_eq!(out.row(0), &[0.5, 0.7, 0.0, 0.0]);
    }

    #[test]
    fn two_class_one_hot() {
        let v = LabelVocab::new(&["walk", "sit"]).unwrap();
        let out = append_label(&Matrix::zeros(1, 1), LabelId::Class(1), &v).unwrap();
        assert_eq!(out.row(0), &[0.0, 0.0, 1.0]);
        assert!(append_label(&Matrix::zeros(1, 1), LabelId::Class(2), &v).is_err());
        assert!(LabelVocab::new(&["a", "a"]).is_err());
    }
}
