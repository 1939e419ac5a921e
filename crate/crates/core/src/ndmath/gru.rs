use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dense::Activation;
use super::matrix::Matrix;
use super::params::{join, Parameters, TensorMut, TensorRef};
use crate::error::{Error, Result};

/// Gated recurrent unit, reset gate applied before the recurrent product:
///
/// ```text
/// z  = σ(W_z x + U_z h + b_z)
/// r  = σ(W_r x + U_r h + b_r)
/// h̃  = act(W_h x + U_h (r ⊙ h) + b_h)
/// h' = (1 − z) ⊙ h + z ⊙ h̃
/// ```
///
/// `activation` is the candidate activation (`tanh` by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w_z: Matrix,
    pub w_r: Matrix,
    pub w_h: Matrix,
    pub u_z: Matrix,
    pub u_r: Matrix,
    pub u_h: Matrix,
    pub b_z: Vec<f64>,
    pub b_r: Vec<f64>,
    pub b_h: Vec<f64>,
    pub activation: Activation,
}

/// Intermediate values of one step, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct GruStepCache {
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub cand: Vec<f64>,
    pub h: Vec<f64>,
}

/// Forward trace of a GRU over a sequence.
#[derive(Debug, Clone)]
pub struct GruTrace {
    pub h0: Vec<f64>,
    pub steps: Vec<GruStepCache>,
}

impl GruTrace {
    /// Hidden state after step `t` (0-based).
    pub fn output(&self, t: usize) -> &[f64] {
        &self.steps[t].h
    }

    pub fn last(&self) -> &[f64] {
        self.steps.last().map_or(&self.h0, |s| &s.h)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl GruParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize, activation: Activation) -> Self {
        Self {
            input_dim,
            hidden_dim,
            w_z: Matrix::zeros(hidden_dim, input_dim),
            w_r: Matrix::zeros(hidden_dim, input_dim),
            w_h: Matrix::zeros(hidden_dim, input_dim),
            u_z: Matrix::zeros(hidden_dim, hidden_dim),
            u_r: Matrix::zeros(hidden_dim, hidden_dim),
            u_h: Matrix::zeros(hidden_dim, hidden_dim),
            b_z: vec![0.0; hidden_dim],
            b_r: vec![0.0; hidden_dim],
            b_h: vec![0.0; hidden_dim],
            activation,
        }
    }

    /// Glorot-uniform input weights, uniform `±1/√hidden` recurrent weights, zero biases.
    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        hidden_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let mut p = Self::zeros(input_dim, hidden_dim, activation);
        let in_limit = (6.0 / (input_dim + hidden_dim).max(1) as f64).sqrt();
        let rec_limit = 1.0 / (hidden_dim.max(1) as f64).sqrt();
        for m in [&mut p.w_z, &mut p.w_r, &mut p.w_h] {
            for w in m.data_mut() {
                *w = rng.random_range(-in_limit..in_limit);
            }
        }
        for m in [&mut p.u_z, &mut p.u_r, &mut p.u_h] {
            for w in m.data_mut() {
                *w = rng.random_range(-rec_limit..rec_limit);
            }
        }
        p
    }

    /// One checked GRU step.
    pub fn step(&self, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim || h.len() != self.hidden_dim {
            return Err(Error::shape(format!(
                "gru step with input {} / hidden {}, expected {} / {}",
                x.len(),
                h.len(),
                self.input_dim,
                self.hidden_dim
            )));
        }
        Ok(self.step_cached(x, h).h)
    }

    pub(crate) fn step_cached(&self, x: &[f64], h: &[f64]) -> GruStepCache {
        let n = self.hidden_dim;
        let mut az = self.b_z.clone();
        let mut ar = self.b_r.clone();
        let mut ah = self.b_h.clone();
        self.w_z.matvec_acc(x, &mut az);
        self.u_z.matvec_acc(h, &mut az);
        self.w_r.matvec_acc(x, &mut ar);
        self.u_r.matvec_acc(h, &mut ar);
        let z: Vec<f64> = az.into_iter().map(sigmoid).collect();
        let r: Vec<f64> = ar.into_iter().map(sigmoid).collect();
        let rh: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
        self.w_h.matvec_acc(x, &mut ah);
        self.u_h.matvec_acc(&rh, &mut ah);
        let cand: Vec<f64> = ah.into_iter().map(|v| self.activation.apply(v)).collect();
        let mut h_new = vec![0.0; n];
        for i in 0..n {
            h_new[i] = (1.0 - z[i]) * h[i] + z[i] * cand[i];
        }
        GruStepCache {
            z,
            r,
            cand,
            h: h_new,
        }
    }

    /// Runs the GRU over `inputs` (rows = time steps) starting from `h0`.
    pub(crate) fn run(&self, h0: Vec<f64>, inputs: &[Vec<f64>]) -> GruTrace {
        let mut steps = Vec::with_capacity(inputs.len());
        let mut h = h0.clone();
        for x in inputs {
            let c = self.step_cached(x, &h);
            h.clone_from(&c.h);
            steps.push(c);
        }
        GruTrace { h0, steps }
    }

    /// Same as [`GruParams::run`] with every input equal to the empty vector.
    pub(crate) fn run_free(&self, h0: Vec<f64>, steps: usize) -> GruTrace {
        let empty = vec![Vec::new(); steps];
        self.run(h0, &empty)
    }

    /// Backpropagation through time.
    ///
    /// `d_out[t]` is the loss gradient w.r.t. the hidden state emitted at step `t`
    /// (not including the recurrent contribution). Returns gradients w.r.t. each
    /// input and w.r.t. `h0`; parameter gradients are accumulated into `grad`.
    pub(crate) fn backward(
        &self,
        inputs: &[Vec<f64>],
        trace: &GruTrace,
        d_out: &[Vec<f64>],
        grad: &mut GruParams,
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.hidden_dim;
        let steps = trace.steps.len();
        debug_assert_eq!(d_out.len(), steps);
        let mut d_inputs = vec![vec![0.0; self.input_dim]; steps];
        let mut dh_next = vec![0.0; n];
        let mut d_az = vec![0.0; n];
        let mut d_ar = vec![0.0; n];
        let mut d_ah = vec![0.0; n];
        let mut rh = vec![0.0; n];
        for t in (0..steps).rev() {
            let c = &trace.steps[t];
            let h_prev: &[f64] = if t == 0 { &trace.h0 } else { &trace.steps[t - 1].h };
            let mut dh_prev = vec![0.0; n];
            for i in 0..n {
                let dh = d_out[t][i] + dh_next[i];
                let dz = dh * (c.cand[i] - h_prev[i]);
                let dcand = dh * c.z[i];
                dh_prev[i] = dh * (1.0 - c.z[i]);
                d_ah[i] = dcand * self.activation.derivative_from_output(c.cand[i]);
                d_az[i] = dz * c.z[i] * (1.0 - c.z[i]);
                rh[i] = c.r[i] * h_prev[i];
            }
            let mut d_rh = vec![0.0; n];
            self.u_h.matvec_t_acc(&d_ah, &mut d_rh);
            for i in 0..n {
                let dr = d_rh[i] * h_prev[i];
                dh_prev[i] += d_rh[i] * c.r[i];
                d_ar[i] = dr * c.r[i] * (1.0 - c.r[i]);
            }
            self.u_z.matvec_t_acc(&d_az, &mut dh_prev);
            self.u_r.matvec_t_acc(&d_ar, &mut dh_prev);

            let x = &inputs[t];
            grad.w_z.add_outer(&d_az, x);
            grad.w_r.add_outer(&d_ar, x);
            grad.w_h.add_outer(&d_ah, x);
            grad.u_z.add_outer(&d_az, h_prev);
            grad.u_r.add_outer(&d_ar, h_prev);
            grad.u_h.add_outer(&d_ah, &rh);
            for i in 0..n {
                grad.b_z[i] += d_az[i];
                grad.b_r[i] += d_ar[i];
                grad.b_h[i] += d_ah[i];
            }
            if self.input_dim > 0 {
                let dx = &mut d_inputs[t];
                self.w_z.matvec_t_acc(&d_az, dx);
                self.w_r.matvec_t_acc(&d_ar, dx);
                self.w_h.matvec_t_acc(&d_ah, dx);
            }
            dh_next = dh_prev;
        }
        (d_inputs, dh_next)
    }
}

impl Parameters for GruParams {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        for (name, m) in [
            ("w_z", &self.w_z),
            ("w_r", &self.w_r),
            ("w_h", &self.w_h),
            ("u_z", &self.u_z),
            ("u_r", &self.u_r),
            ("u_h", &self.u_h),
        ] {
            out.push(TensorRef {
                name: join(prefix, name),
                dims: vec![m.rows(), m.cols()],
                values: m.data(),
            });
        }
        for (name, b) in [("b_z", &self.b_z), ("b_r", &self.b_r), ("b_h", &self.b_h)] {
            out.push(TensorRef {
                name: join(prefix, name),
                dims: vec![b.len()],
                values: b,
            });
        }
    }

    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        for (name, m) in [
            ("w_z", &mut self.w_z),
            ("w_r", &mut self.w_r),
            ("w_h", &mut self.w_h),
            ("u_z", &mut self.u_z),
            ("u_r", &mut self.u_r),
            ("u_h", &mut self.u_h),
        ] {
            let dims = vec![m.rows(), m.cols()];
            out.push(TensorMut {
                name: join(prefix, name),
                dims,
                values: m.data_mut(),
            });
        }
        for (name, b) in [
            ("b_z", &mut self.b_z),
            ("b_r", &mut self.b_r),
            ("b_h", &mut self.b_h),
        ] {
            let dims = vec![b.len()];
            out.push(TensorMut {
                name: join(prefix, name),
                dims,
                values: b,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Scalar-loop GRU written independently of the matrix helpers.
    fn oracle_step(p: &GruParams, x: &[f64], h: &[f64]) -> Vec<f64> {
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let n = p.hidden_dim;
        let mut out = vec![0.0; n];
        let mut r = vec![0.0; n];
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut sz = p.b_z[i];
            let mut sr = p.b_r[i];
            for k in 0..p.input_dim {
                sz += p.w_z.get(i, k) * x[k];
                sr += p.w_r.get(i, k) * x[k];
            }
            for k in 0..n {
                sz += p.u_z.get(i, k) * h[k];
                sr += p.u_r.get(i, k) * h[k];
            }
            z[i] = sig(sz);
            r[i] = sig(sr);
        }
        for i in 0..n {
            let mut s = p.b_h[i];
            for k in 0..p.input_dim {
                s += p.w_h.get(i, k) * x[k];
            }
            for k in 0..n {
                s += p.u_h.get(i, k) * r[k] * h[k];
            }
            out[i] = (1.0 - z[i]) * h[i] + z[i] * s.tanh();
        }
        out
    }

    fn random_params(rng: &mut ChaCha8Rng, input: usize, hidden: usize) -> GruParams {
        let mut p = GruParams::init(input, hidden, Activation::Tanh, rng);
        for b in [&mut p.b_z, &mut p.b_r, &mut p.b_h] {
            b.iter_mut().for_each(|v| *v = rng.random_range(-0.5..0.5));
        }
        p
    }

    #[test]
    fn zero_params_halve_state() {
        let p = GruParams::zeros(3, 2, Activation::Tanh);
        let h = p.step(&[1.0, -2.0, 0.5], &[0.8, -0.4]).unwrap();
        assert_eq!(h, vec![0.4, -0.2]);
    }

    #[test]
    fn zero_state_zero_weights_stays_zero() {
        let p = GruParams::zeros(2, 3, Activation::Tanh);
        assert_eq!(p.step(&[5.0, 5.0], &[0.0; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn matches_scalar_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = random_params(&mut rng, 4, 5);
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let got = p.step(&x, &h).unwrap();
            let want = oracle_step(&p, &x, &h);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn shape_errors() {
        let p = GruParams::zeros(2, 3, Activation::Tanh);
        assert!(matches!(p.step(&[1.0], &[0.0; 3]), Err(Error::Shape(_))));
        assert!(matches!(p.step(&[1.0, 1.0], &[0.0; 2]), Err(Error::Shape(_))));
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_params(&mut rng, 3, 4);
        let inputs: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let h0: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
        let weights: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let loss = |p: &GruParams, inputs: &[Vec<f64>], h0: &[f64]| -> f64 {
            let tr = p.run(h0.to_vec(), inputs);
            (0..5)
                .map(|t| tr.output(t).iter().zip(&weights[t]).map(|(a, b)| a * b).sum::<f64>())
                .sum()
        };
        let tr = p.run(h0.clone(), &inputs);
        let mut grad = GruParams::zeros(3, 4, Activation::Tanh);
        let (dx, dh0) = p.backward(&inputs, &tr, &weights, &mut grad);

        let eps = 1e-6;
        let flat = p.flatten();
        let g = grad.flatten();
        for i in 0..flat.len() {
            let mut a = p.clone();
            let mut b = p.clone();
            let mut fa = flat.clone();
            let mut fb = flat.clone();
            fa[i] += eps;
            fb[i] -= eps;
            a.assign(&fa);
            b.assign(&fb);
            let num = (loss(&a, &inputs, &h0) - loss(&b, &inputs, &h0)) / (2.0 * eps);
            assert!((num - g[i]).abs() < 1e-7, "param {i}: {num} vs {}", g[i]);
        }
        for t in 0..5 {
            for k in 0..3 {
                let mut xa = inputs.clone();
                let mut xb = inputs.clone();
                xa[t][k] += eps;
                xb[t][k] -= eps;
                let num = (loss(&p, &xa, &h0) - loss(&p, &xb, &h0)) / (2.0 * eps);
                assert!((num - dx[t][k]).abs() < 1e-7);
            }
        }
        for k in 0..4 {
            let mut ha = h0.clone();
            let mut hb = h0.clone();
            ha[k] += eps;
            hb[k] -= eps;
            let num = (loss(&p, &inputs, &ha) - loss(&p, &inputs, &hb)) / (2.0 * eps);
            assert!((num - dh0[k]).abs() < 1e-7);
        }
    }
}
