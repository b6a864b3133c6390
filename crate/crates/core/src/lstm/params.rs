use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Output = 2,
    Candidate = 3,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Candidate];
}

/// Offsets of each block inside the flat parameter vector:
/// `W[4][H][n]`, `U[4][H][H]`, `b[4][H]`, `w_out[H]`, `b_out`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub hidden: usize,
    pub input: usize,
}

impl Layout {
    pub fn new(hidden: usize, input: usize) -> Result<Layout> {
        if hidden == 0 || input == 0 {
            return Err(Error::DimensionMismatch(format!(
                "hidden ({hidden}) and input ({input}) sizes must be positive"
            )));
        }
        Ok(Layout { hidden, input })
    }

    pub fn len(&self) -> usize {
        let (h, n) = (self.hidden, self.input);
        4 * h * n + 4 * h * h + 4 * h + h + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn w(&self, g: Gate) -> Range<usize> {
        let size = self.hidden * self.input;
        let start = g as usize * size;
        start..start + size
    }

    pub fn u(&self, g: Gate) -> Range<usize> {
        let size = self.hidden * self.hidden;
        let start = 4 * self.hidden * self.input + g as usize * size;
        start..start + size
    }

    pub fn b(&self, g: Gate) -> Range<usize> {
        let start = 4 * self.hidden * (self.input + self.hidden) + g as usize * self.hidden;
        start..start + self.hidden
    }

    pub fn w_out(&self) -> Range<usize> {
        let start = 4 * self.hidden * (self.input + self.hidden + 1);
        start..start + self.hidden
    }

    pub fn b_out(&self) -> usize {
        self.len() - 1
    }

    /// True for entries subject to the weight penalty (everything but biases).
    pub fn is_weight(&self, i: usize) -> bool {
        let h = self.hidden;
        let bias_start = 4 * h * (self.input + h);
        i < bias_start || self.w_out().contains(&i)
    }
}

static NEXT_STAMP: AtomicU64 = AtomicU64::new(1);

fn fresh_stamp() -> u64 {
    NEXT_STAMP.fetch_add(1, Ordering::Relaxed)
}

/// LSTM weights plus the scalar readout. Every mutation re-stamps the
/// parameters so that tapes recorded earlier are rejected by `backward`.
#[derive(Debug, Clone)]
pub struct LstmParams {
    layout: Layout,
    data: Vec<f64>,
    stamp: u64,
}

impl PartialEq for LstmParams {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.data == other.data
    }
}

impl LstmParams {
    pub fn zeros(hidden: usize, input: usize) -> Result<LstmParams> {
        let layout = Layout::new(hidden, input)?;
        Ok(LstmParams {
            layout,
            data: vec![0.0; layout.len()],
            stamp: fresh_stamp(),
        })
    }

    pub fn from_vec(hidden: usize, input: usize, data: Vec<f64>) -> Result<LstmParams> {
        let layout = Layout::new(hidden, input)?;
        if data.len() != layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                layout.len(),
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(LstmParams {
            layout,
            data,
            stamp: fresh_stamp(),
        })
    }

    /// Uniform(−1/√H, 1/√H) everywhere, forget-gate bias 1.
    pub fn init(hidden: usize, input: usize, seed: u64) -> Result<LstmParams> {
        let mut p = LstmParams::zeros(hidden, input)?;
        let k = 1.0 / (hidden as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in p.data.iter_mut() {
            *v = rng.random_range(-k..k);
        }
        let fb = p.layout.b(Gate::Forget);
        p.data[fb].iter_mut().for_each(|v| *v = 1.0);
        Ok(p)
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn hidden_size(&self) -> usize {
        self.layout.hidden
    }

    pub fn input_size(&self) -> usize {
        self.layout.input
    }

    pub fn stamp(&self) -> u64 {
        self.stamp
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mutable access; invalidates outstanding tapes.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        self.stamp = fresh_stamp();
        &mut self.data
    }

    pub fn w(&self, g: Gate) -> &[f64] {
        &self.data[self.layout.w(g)]
    }

    pub fn u(&self, g: Gate) -> &[f64] {
        &self.data[self.layout.u(g)]
    }

    pub fn b(&self, g: Gate) -> &[f64] {
        &self.data[self.layout.b(g)]
    }

    pub fn w_out(&self) -> &[f64] {
        &self.data[self.layout.w_out()]
    }

    pub fn b_out(&self) -> f64 {
        self.data[self.layout.b_out()]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `Σ w²` over penalized entries.
    pub fn weight_sq_norm(&self) -> f64 {
        self.data
            .iter()
            .enumerate()
            .filter(|(i, _)| self.layout.is_weight(*i))
            .map(|(_, v)| v * v)
            .sum()
    }
}

/// Gradient with the same layout as [`LstmParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layout: Layout,
    data: Vec<f64>,
}

impl Gradients {
    pub fn zeros(layout: Layout) -> Gradients {
        Gradients {
            layout,
            data: vec![0.0; layout.len()],
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn reset(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn w(&self, g: Gate) -> &[f64] {
        &self.data[self.layout.w(g)]
    }

    pub fn u(&self, g: Gate) -> &[f64] {
        &self.data[self.layout.u(g)]
    }

    pub fn b(&self, g: Gate) -> &[f64] {
        &self.data[self.layout.b(g)]
    }

    pub fn w_out(&self) -> &[f64] {
        &self.data[self.layout.w_out()]
    }

    pub fn b_out(&self) -> f64 {
        self.data[self.layout.b_out()]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Adds `2·l2·w` to every penalized entry.
    pub fn add_weight_penalty(&mut self, params: &LstmParams, l2: f64) {
        if l2 == 0.0 {
            return;
        }
        for (i, (g, p)) in self.data.iter_mut().zip(params.as_slice()).enumerate() {
            if self.layout.is_weight(i) {
                *g += 2.0 * l2 * p;
            }
        }
    }
}
