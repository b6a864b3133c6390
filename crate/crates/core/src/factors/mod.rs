//! Factor validity tests, screening and the linear multi-factor baseline.

mod linear;
mod ols;
mod screen;
mod stats;

pub use linear::{fit_ols, fit_ols_rows, predict_linear, LinearModel};
pub use screen::{screen_factors, select_factors, ScreenConfig};
pub use stats::{information_coefficient, midranks, pearson, rank_ic, FactorStats};
