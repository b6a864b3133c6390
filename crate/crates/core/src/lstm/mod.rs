//! Single-layer LSTM regressor trained by backpropagation through time.

mod cell;
mod dd;
mod io;
mod params;
mod train;
mod window;

pub use cell::{backward, forward, forward_into, grad_check, mse_loss, LstmState, Tape};
pub use io::{read_params, write_params, FORMAT_VERSION, MAGIC};
pub use params::{Gate, Gradients, Layout, LstmParams};
pub use train::{clip_global_norm, train, Adam, TrainConfig, TrainOutcome};
pub use window::{make_windows, make_windows_ending, window_inputs, Sample};

/// Prediction for a single input window.
pub fn predict(params: &LstmParams, inputs: &[f64]) -> crate::Result<f64> {
    forward(params, inputs).map(|(p, _)| p)
}
