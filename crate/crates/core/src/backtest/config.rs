use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factors::ScreenConfig;
use crate::lstm::TrainConfig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Linear,
    Lstm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Lstm => "lstm",
        }
    }

    /// Row label in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Linear => "Benchmark model",
            ModelKind::Lstm => "LSTM model",
        }
    }

    pub fn parse(s: &str) -> Result<ModelKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(ModelKind::Linear),
            "lstm" => Ok(ModelKind::Lstm),
            other => Err(Error::InvalidParameter(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestConfig {
    pub train_days: usize,
    pub test_days: usize,
    pub top_fraction: f64,
    /// Annualised; `None` disables volatility targeting.
    pub vol_target: Option<f64>,
    /// `None` disables drawdown control.
    pub drawdown_limit: Option<f64>,
    /// Trailing days for the realised-volatility estimate.
    pub vol_window: usize,
    // model, training settings, seed and screen come from the run
    // configuration rather than the `backtest` block
    #[serde(skip)]
    pub model_kind: ModelKind,
    #[serde(skip)]
    pub train_cfg: TrainConfig,
    #[serde(skip)]
    pub seed: u64,
    pub regime_lookback: usize,
    pub regime_threshold: f64,
    /// Proportional cost charged on one-way turnover at each rebalance.
    pub transaction_cost: f64,
    pub risk_free_rate: f64,
    #[serde(skip)]
    pub screen: ScreenConfig,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            train_days: 750,
            test_days: 250,
            top_fraction: 0.2,
            vol_target: Some(0.15),
            drawdown_limit: Some(0.10),
            vol_window: 20,
            model_kind: ModelKind::Linear,
            train_cfg: TrainConfig::default(),
            seed: 0,
            regime_lookback: 60,
            regime_threshold: 0.10,
            transaction_cost: 0.0,
            risk_free_rate: 0.0,
            screen: ScreenConfig::default(),
        }
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.train_days < 2 || self.test_days < 1 {
            return bad("train_days must be at least 2 and test_days at least 1".into());
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return bad(format!("top_fraction {} outside (0, 1]", self.top_fraction));
        }
        if matches!(self.vol_target, Some(v) if !(v > 0.0)) {
            return bad("vol_target must be positive".into());
        }
        if matches!(self.drawdown_limit, Some(d) if !(d > 0.0 && d < 1.0)) {
            return bad("drawdown_limit must lie in (0, 1)".into());
        }
        if self.vol_window < 2 {
            return bad("vol_window must be at least 2".into());
        }
        if self.regime_lookback < 1 || !(self.regime_threshold >= 0.0) {
            return bad("regime_lookback must be positive and regime_threshold non-negative".into());
        }
        if !(self.transaction_cost >= 0.0 && self.transaction_cost < 1.0) {
            return bad("transaction_cost must lie in [0, 1)".into());
        }
        if !self.risk_free_rate.is_finite() {
            return bad("risk_free_rate must be finite".into());
        }
        self.screen.validate()?;
        if self.model_kind == ModelKind::Lstm {
            self.train_cfg.validate()?;
            if self.train_cfg.window >= self.train_days {
                return bad(format!(
                    "LSTM window {} must be shorter than train_days {}",
                    self.train_cfg.window, self.train_days
                ));
            }
        }
        Ok(())
    }
}
