use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning-rate schedule applied per update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    /// `lr0 / (1 + decay · t)`, `t` = zero-based update index.
    InverseTime { decay: f64 },
    /// `lr0 · rate^⌊t / every⌋`.
    Step { rate: f64, every: u64 },
}

impl LrSchedule {
    pub fn rate_at(&self, lr0: f64, t: u64) -> f64 {
        match *self {
            LrSchedule::Constant => lr0,
            LrSchedule::InverseTime { decay } => lr0 / (1.0 + decay * t as f64),
            LrSchedule::Step { rate, every } => lr0 * rate.powi((t / every.max(1)) as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NadamConfig {
    pub lr0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub schedule: LrSchedule,
}

impl NadamConfig {
    pub fn new(lr0: f64, schedule: LrSchedule) -> Self {
        Self {
            lr0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            schedule,
        }
    }
}

impl Default for NadamConfig {
    fn default() -> Self {
        Self::new(8e-4, LrSchedule::InverseTime { decay: 4e-3 })
    }
}

/// Nesterov-accelerated Adam with a constant momentum coefficient.
///
/// ```text
/// m  = β1 m + (1 − β1) g
/// v  = β2 v + (1 − β2) g²
/// m̂  = β1 m / (1 − β1^(t+1)) + (1 − β1) g / (1 − β1^t)
/// v̂  = v / (1 − β2^t)
/// θ -= lr_t · m̂ / (√v̂ + ε)
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub config: NadamConfig,
    pub step: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl OptimizerState {
    pub fn new(config: NadamConfig, param_count: usize) -> Self {
        Self {
            config,
            step: 0,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
        }
    }

    /// Learning rate the next update will use.
    pub fn current_lr(&self) -> f64 {
        self.config.schedule.rate_at(self.config.lr0, self.step)
    }

    /// Applies one update in place. Non-finite gradients leave `params` and the
    /// state untouched.
    pub fn nadam_step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.first_moment.len() {
            return Err(Error::shape(format!(
                "nadam over {} params, {} grads, state for {}",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        let bad: Vec<usize> = grads
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.is_finite())
            .map(|(i, _)| i)
            .collect();
        if let Some(&first) = bad.first() {
            return Err(Error::NonFinite {
                count: bad.len(),
                first,
            });
        }
        let NadamConfig {
            beta1,
            beta2,
            epsilon,
            ..
        } = self.config;
        let lr = self.current_lr();
        let t = (self.step + 1) as i32;
        let c1_next = 1.0 - beta1.powi(t + 1);
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            let m = beta1 * self.first_moment[i] + (1.0 - beta1) * g;
            let v = beta2 * self.second_moment[i] + (1.0 - beta2) * g * g;
            self.first_moment[i] = m;
            self.second_moment[i] = v;
            let m_hat = beta1 * m / c1_next + (1.0 - beta1) * g / c1;
            let v_hat = v / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
        }
        self.step += 1;
        Ok(())
    }
}
