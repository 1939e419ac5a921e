use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Mean absolute error over all entries.
pub fn mae_loss(pred: &Matrix, target: &Matrix) -> Result<f64> {
    if pred.shape() != target.shape() {
        return Err(Error::shape(format!(
            "mae over {:?} and {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    Ok(mae_slices(pred.data(), target.data()))
}

/// Subgradient of [`mae_loss`] w.r.t. `pred`: `sign(pred − target) / count`, 0 at ties.
pub fn mae_grad(pred: &Matrix, target: &Matrix) -> Result<Matrix> {
    if pred.shape() != target.shape() {
        return Err(Error::shape(format!(
            "mae gradient over {:?} and {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let g = mae_grad_slices(pred.data(), target.data());
    Matrix::from_vec(pred.rows(), pred.cols(), g)
}

pub(crate) fn mae_slices(pred: &[f64], target: &[f64]) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    let sum: f64 = pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum();
    sum / pred.len() as f64
}

pub(crate) fn mae_grad_slices(pred: &[f64], target: &[f64]) -> Vec<f64> {
    let inv = 1.0 / pred.len().max(1) as f64;
    pred.iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            if d > 0.0 {
                inv
            } else if d < 0.0 {
                -inv
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_is_zero() {
        let m = Matrix::from_vec(2, 2, vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        assert_eq!(mae_loss(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn hand_value() {
        let p = Matrix::from_vec(1, 2, vec![1.0, 2.0]).unwrap();
        let t = Matrix::from_vec(1, 2, vec![0.0, 4.0]).unwrap();
        assert_eq!(mae_loss(&p, &t).unwrap(), 1.5);
        let g = mae_grad(&p, &t).unwrap();
        assert_eq!(g.data(), &[0.5, -0.5]);
    }

    #[test]
    fn shape_mismatch() {
        let p = Matrix::zeros(1, 2);
        let t = Matrix::zeros(2, 1);
        assert!(matches!(mae_loss(&p, &t), Err(Error::Shape(_))));
    }

    #[test]
    fn tie_subgradient_is_zero() {
        assert_eq!(mae_grad_slices(&[1.0, 2.0], &[1.0, 0.0]), vec![0.0, 0.5]);
    }

    proptest! {
        #[test]
        fn matches_elementwise_oracle(v in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40)) {
            let (a, b): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let n = a.len();
            let mut sum = 0.0;
            for i in 0..n {
                sum += (a[i] - b[i]).abs();
            }
            let oracle = sum / n as f64;
            let pa = Matrix::from_vec(1, n, a.clone()).unwrap();
            let pb = Matrix::from_vec(1, n, b.clone()).unwrap();
            let got = mae_loss(&pa, &pb).unwrap();
            prop_assert!((got - oracle).abs() <= 1e-12);
            prop_assert!(got >= 0.0);
            prop_assert_eq!(got == 0.0, a == b);
        }
    }
}
