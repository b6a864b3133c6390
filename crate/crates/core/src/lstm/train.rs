use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::cell::{accumulate, forward_into, Tape};
use super::params::{Gradients, LstmParams};
use super::window::Sample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub window: usize,
    pub hidden_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// `None` disables clipping.
    pub grad_clip: Option<f64>,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            window: 20,
            hidden_size: 32,
            epochs: 50,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            seed: 0,
            grad_clip: Some(5.0),
            l2: 1e-5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.window < 1 {
            return bad("window must be at least 1");
        }
        if self.epochs < 1 {
            return bad("epochs must be at least 1");
        }
        if self.hidden_size < 1 {
            return bad("hidden_size must be at least 1");
        }
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("decay rates must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if matches!(self.grad_clip, Some(c) if !(c > 0.0)) {
            return bad("grad_clip must be positive");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 must be non-negative");
        }
        Ok(())
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl Adam {
    pub fn new(len: usize, cfg: &TrainConfig) -> Adam {
        Adam {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
        }
    }

    pub fn step(&mut self, params: &mut LstmParams, grads: &Gradients) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let theta = params.as_mut_slice();
        for (((p, g), m), v) in theta.iter_mut().zip(grads.as_slice()).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.epsilon);
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: LstmParams,
    /// Mean squared error over all samples, one entry per epoch.
    pub loss_curve: Vec<f64>,
}

/// Scales `grads` so its global norm does not exceed `max_norm`.
pub fn clip_global_norm(grads: &mut Gradients, max_norm: f64) {
    let norm = grads.norm();
    if norm > max_norm {
        let s = max_norm / norm;
        grads.as_mut_slice().iter_mut().for_each(|g| *g *= s);
    }
}

/// Mini-batch training on pooled samples. Deterministic for a fixed
/// configuration: batches are drawn from a seeded shuffle and accumulated
/// in a fixed order.
pub fn train(samples: &[Sample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let first = samples.first().ok_or(Error::EmptyInput)?;
    if first.inputs.len() % cfg.window != 0 || first.inputs.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "sample of {} values does not split into {} rows",
            first.inputs.len(),
            cfg.window
        )));
    }
    let n = first.inputs.len() / cfg.window;
    if let Some(bad) = samples.iter().find(|s| s.inputs.len() != first.inputs.len()) {
        return Err(Error::DimensionMismatch(format!(
            "inconsistent sample lengths {} and {}",
            first.inputs.len(),
            bad.inputs.len()
        )));
    }
    if samples.iter().any(|s| !s.target.is_finite()) {
        return Err(Error::NonFiniteInput);
    }

    let mut params = LstmParams::init(cfg.hidden_size, n, cfg.seed)?;
    let mut adam = Adam::new(params.layout().len(), cfg);
    let mut grads = Gradients::zeros(params.layout());
    let mut tape = Tape::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut loss_curve = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sq_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.reset();
            let scale = 2.0 / batch.len() as f64;
            for &i in batch {
                let s = &samples[i];
                let pred = forward_into(&params, &s.inputs, &mut tape)?;
                let r = pred - s.target;
                sq_sum += r * r;
                accumulate(&params, &tape, scale * r, &mut grads)?;
            }
            grads.add_weight_penalty(&params, cfg.l2);
            if let Some(c) = cfg.grad_clip {
                clip_global_norm(&mut grads, c);
            }
            adam.step(&mut params, &grads);
            if !params.is_finite() {
                return Err(Error::DivergedLoss { epoch });
            }
        }
        let loss = sq_sum / samples.len() as f64;
        if !loss.is_finite() {
            return Err(Error::DivergedLoss { epoch });
        }
        loss_curve.push(loss);
    }
    Ok(TrainOutcome { params, loss_curve })
}
