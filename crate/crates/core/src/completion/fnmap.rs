use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::add::{CompletionMode, CompletionVector, PatternPairSet};
use crate::error::{Error, Result};
use crate::hs2sae::{rng_for, LatentCode};
use crate::ndmath::{
    mae_grad_slices, mae_slices, Activation, DenseParams, LrSchedule, Matrix, NadamConfig, OptimizerState,
    Parameters,
};

/// Optimisation settings for the single-layer completer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnTrainConfig {
    pub lr0: f64,
    pub epochs: usize,
    pub batch: usize,
    /// Learning rate is multiplied by this factor every `decay_every` epochs.
    pub decay_rate: f64,
    pub decay_every: usize,
    pub seed: u64,
}

impl Default for FnTrainConfig {
    fn default() -> Self {
        Self {
            lr0: 1e-3,
            epochs: 50,
            batch: 32,
            decay_rate: 0.5,
            decay_every: 10,
            seed: 0,
        }
    }
}

/// One linear dense layer mapping prefix codes to target codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnCompleter {
    pub layer: DenseParams,
    pub trained_j: usize,
    pub mode: CompletionMode,
    pub prefix_len: usize,
    pub target_len: usize,
    /// Spread of the training differences, used to scale generation noise.
    pub sigma: Option<Vec<f64>>,
}

impl FnCompleter {
    pub fn apply(&self, z: &LatentCode) -> Result<LatentCode> {
        if z.prefix_len != self.prefix_len {
            return Err(Error::arg(format!(
                "code covers {} frames, completer expects {}",
                z.prefix_len, self.prefix_len
            )));
        }
        Ok(LatentCode {
            z: self.layer.forward(&z.z)?,
            prefix_len: self.target_len,
        })
    }
}

/// MAE of `layer(p_i)` against `c_i` over `idx`, with its parameter gradient.
pub fn fn_loss_and_grad(layer: &DenseParams, pairs: &PatternPairSet, idx: &[usize]) -> (f64, DenseParams) {
    let n = layer.output_dim();
    let mut grad = DenseParams::zeros(layer.input_dim(), n, layer.activation);
    let mut pred = Vec::with_capacity(idx.len() * n);
    let mut target = Vec::with_capacity(idx.len() * n);
    for &i in idx {
        pred.extend(layer.apply(&pairs.inputs[i]));
        target.extend_from_slice(&pairs.targets[i]);
    }
    let loss = mae_slices(&pred, &target);
    let dy = mae_grad_slices(&pred, &target);
    for (k, &i) in idx.iter().enumerate() {
        let range = k * n..(k + 1) * n;
        layer.backward(&pairs.inputs[i], &pred[range.clone()], &dy[range], &mut grad);
    }
    (loss, grad)
}

/// Trains the completer with Nadam and a step-decayed learning rate.
///
/// Starts from the vector-addition solution (identity weight, mean difference
/// as bias), so training can only refine it.
pub fn fit_fn(pairs: &PatternPairSet, fc: &FnTrainConfig) -> Result<FnCompleter> {
    if pairs.is_empty() {
        return Err(Error::arg("fit_fn needs at least one pair"));
    }
    if fc.batch == 0 || !(fc.lr0 > 0.0) {
        return Err(Error::Config("fn batch and lr0 must be positive".into()));
    }
    let n = pairs.dim();
    let add = CompletionVector::from_pairs(pairs)?;
    let mut layer = DenseParams::new(Matrix::identity(n), add.v.clone(), Activation::Linear)?;
    let per_epoch = pairs.len().div_ceil(fc.batch) as u64;
    let schedule = LrSchedule::Step {
        rate: fc.decay_rate,
        every: per_epoch * fc.decay_every.max(1) as u64,
    };
    let mut opt = OptimizerState::new(NadamConfig::new(fc.lr0, schedule), layer.param_count());
    let mut flat = layer.flatten();
    let mut rng = rng_for(fc.seed, 3);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    for _ in 0..fc.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(fc.batch) {
            let (_, grad) = fn_loss_and_grad(&layer, pairs, chunk);
            opt.nadam_step(&mut flat, &grad.flatten())?;
            layer.assign(&flat);
        }
    }
    Ok(FnCompleter {
        layer,
        trained_j: pairs.j,
        mode: pairs.mode,
        prefix_len: pairs.prefix_len,
        target_len: pairs.target_len,
        sigma: Some(add.sigma),
    })
}

/// Mean absolute error of the completer on a pair set.
pub fn fn_mae(completer: &FnCompleter, pairs: &PatternPairSet) -> f64 {
    let idx: Vec<usize> = (0..pairs.len()).collect();
    fn_loss_and_grad(&completer.layer, pairs, &idx).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndmath::{finite_diff_coords, relative_error};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pairs(shift: f64, rng: &mut ChaCha8Rng) -> PatternPairSet {
        let inputs: Vec<Vec<f64>> = (0..40).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let targets = inputs.iter().map(|p| p.iter().map(|x| x + shift).collect()).collect();
        PatternPairSet::new(1, CompletionMode::Completion, 2, 8, inputs, targets).unwrap()
    }

    #[test]
    fn realizable_maps_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for shift in [0.0, 0.3] {
            let train = pairs(shift, &mut rng);
            let test = pairs(shift, &mut rng);
            let f = fit_fn(&train, &FnTrainConfig::default()).unwrap();
            assert!(fn_mae(&f, &test) < 1e-3);
        }
    }

    #[test]
    fn improves_on_a_general_linear_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Matrix::from_vec(5, 5, (0..25).map(|_| rng.random_range(-0.6..0.6)).collect()).unwrap();
        let inputs: Vec<Vec<f64>> = (0..200).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let targets = inputs
            .iter()
            .map(|p| {
                let mut y = vec![0.1; 5];
                a.matvec_acc(p, &mut y);
                y
            })
            .collect();
        let set = PatternPairSet::new(1, CompletionMode::Completion, 2, 8, inputs, targets).unwrap();
        let add = CompletionVector::from_pairs(&set).unwrap();
        let base = DenseParams::new(Matrix::identity(5), add.v, Activation::Linear).unwrap();
        let before = fn_loss_and_grad(&base, &set, &(0..200).collect::<Vec<_>>()).0;
        let cfg = FnTrainConfig { lr0: 1e-2, epochs: 50, ..FnTrainConfig::default() };
        let f = fit_fn(&set, &cfg).unwrap();
        assert!(fn_mae(&f, &set) < 0.5 * before);
    }

    #[test]
    fn fn_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inputs: Vec<Vec<f64>> = (0..6).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let targets: Vec<Vec<f64>> = (0..6).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let set = PatternPairSet::new(1, CompletionMode::Matching, 2, 2, inputs, targets).unwrap();
        let layer = DenseParams::init(4, 4, Activation::Linear, &mut rng);
        let idx: Vec<usize> = (0..6).collect();
        let analytic = fn_loss_and_grad(&layer, &set, &idx).1.flatten();
        let coords: Vec<usize> = (0..analytic.len()).collect();
        let numeric = finite_diff_coords(
            |theta| {
                let mut l = layer.clone();
                l.assign(theta);
                fn_loss_and_grad(&l, &set, &idx).0
            },
            &layer.flatten(),
            1e-5,
            &coords,
        );
        for (a, b) in analytic.iter().zip(&numeric) {
            assert!(relative_error(*a, *b) <= 1e-4 || (a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn prefix_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = fit_fn(&pairs(0.0, &mut rng), &FnTrainConfig { epochs: 1, ..FnTrainConfig::default() }).unwrap();
        let z = LatentCode { z: vec![0.0; 5], prefix_len: 4 };
        assert!(f.apply(&z).is_err());
        let ok = f.apply(&LatentCode { z: vec![0.0; 5], prefix_len: 2 }).unwrap();
        assert_eq!(ok.prefix_len, 8);
    }
}
