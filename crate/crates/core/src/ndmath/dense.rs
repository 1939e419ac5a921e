use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::params::{join, Parameters, TensorMut, TensorRef};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "linear" => Ok(Activation::Linear),
            other => Err(Error::arg(format!("unknown activation `{other}`"))),
        }
    }
}

/// Fully connected layer `act(W x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseParams {
    pub fn new(weight: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(Error::shape(format!(
                "bias of length {} for a weight with {} rows",
                bias.len(),
                weight.rows()
            )));
        }
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        Self {
            weight: Matrix::zeros(output, input),
            bias: vec![0.0; output],
            activation,
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init<R: Rng + ?Sized>(
        input: usize,
        output: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let mut p = Self::zeros(input, output, activation);
        let limit = (6.0 / (input + output).max(1) as f64).sqrt();
        for w in p.weight.data_mut() {
            *w = rng.random_range(-limit..limit);
        }
        p
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(format!(
                "dense input of length {}, expected {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(self.apply(x))
    }

    /// Unchecked forward pass.
    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.bias.clone();
        self.weight.matvec_acc(x, &mut y);
        if self.activation == Activation::Tanh {
            y.iter_mut().for_each(|v| *v = v.tanh());
        }
        y
    }

    /// Backpropagates `dy` through a forward pass that mapped `x` to `y`.
    /// Accumulates parameter gradients into `grad` and returns `dL/dx`.
    pub(crate) fn backward(&self, x: &[f64], y: &[f64], dy: &[f64], grad: &mut DenseParams) -> Vec<f64> {
        let da: Vec<f64> = dy
            .iter()
            .zip(y)
            .map(|(&g, &out)| g * self.activation.derivative_from_output(out))
            .collect();
        grad.weight.add_outer(&da, x);
        for (b, d) in grad.bias.iter_mut().zip(&da) {
            *b += d;
        }
        let mut dx = vec![0.0; x.len()];
        self.weight.matvec_t_acc(&da, &mut dx);
        dx
    }
}

impl Parameters for DenseParams {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        out.push(TensorRef {
            name: join(prefix, "weight"),
            dims: vec![self.weight.rows(), self.weight.cols()],
            values: self.weight.data(),
        });
        out.push(TensorRef {
            name: join(prefix, "bias"),
            dims: vec![self.bias.len()],
            values: &self.bias,
        });
    }

    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        let dims_w = vec![self.weight.rows(), self.weight.cols()];
        let dims_b = vec![self.bias.len()];
        out.push(TensorMut {
            name: join(prefix, "weight"),
            dims: dims_w,
            values: self.weight.data_mut(),
        });
        out.push(TensorMut {
            name: join(prefix, "bias"),
            dims: dims_b,
            values: &mut self.bias,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_tanh_give_zero() {
        let p = DenseParams::zeros(3, 2, Activation::Tanh);
        assert_eq!(p.forward(&[0.3, -1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_linear() {
        let p = DenseParams::new(Matrix::identity(1), vec![0.0], Activation::Linear).unwrap();
        assert_eq!(p.forward(&[0.5]).unwrap(), vec![0.5]);
    }

    #[test]
    fn hand_arithmetic() {
        let w = Matrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap();
        let p = DenseParams::new(w, vec![1.0], Activation::Linear).unwrap();
        assert_eq!(p.forward(&[1.0, 2.0]).unwrap(), vec![4.0]);
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let p = DenseParams::zeros(3, 2, Activation::Linear);
        assert!(matches!(p.forward(&[1.0]), Err(Error::Shape(_))));
        assert!(DenseParams::new(Matrix::zeros(2, 2), vec![0.0], Activation::Linear).is_err());
    }
}
