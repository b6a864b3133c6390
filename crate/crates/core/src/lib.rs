//! Multi-factor return modelling and risk-controlled backtesting.
//!
//! The pipeline runs in five stages, one module each:
//!
//! * [`marketdata`] loads, cleans and synthesizes daily market panels and
//!   derives log returns and the five-factor set.
//! * [`factors`] measures factor validity (IC, Rank IC), screens factors and
//!   fits the linear multi-factor baseline by QR least squares.
//! * [`lstm`] is a from-scratch LSTM regressor with exact BPTT gradients,
//!   Adam training and a finite-difference gradient checker.
//! * [`risk`] computes maximum drawdown, Sharpe ratio and historical VaR.
//! * [`backtest`] runs regime-segmented walk-forward backtests with
//!   volatility targeting and drawdown control, and renders comparison
//!   tables.

pub mod backtest;
pub mod error;
pub mod factors;
pub mod lstm;
pub mod marketdata;
pub mod risk;

pub use error::{Error, Result};
