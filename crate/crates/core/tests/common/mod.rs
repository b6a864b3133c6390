#![allow(dead_code)]

use factorbt::backtest::{BacktestConfig, ModelKind};
use factorbt::lstm::TrainConfig;
use factorbt::marketdata::{synth_generate, Loadings, MarketPanel, RegimeSpec, SynthConfig, SyntheticMarket};

/// Returns driven only by the linear factor term: no noise, no market
/// loading, no nonlinear component.
pub fn noiseless(days: usize, assets: usize, seed: u64) -> SyntheticMarket {
    let cfg = SynthConfig {
        assets,
        days,
        noise: 0.0,
        loadings: Loadings {
            alpha: 0.0004,
            betas: vec![0.0, 0.0, 0.0015, -0.001, 0.0005],
            nonlinear: 0.0,
            market: 0.0,
        },
        ..SynthConfig::default()
    };
    synth_generate(&cfg, seed).unwrap()
}

pub fn small_market(days: usize, assets: usize, seed: u64) -> MarketPanel {
    let cfg = SynthConfig {
        assets,
        days,
        regimes: vec![
            RegimeSpec { kind: factorbt::marketdata::Regime::Bull, length: 80, drift: 0.002, vol: 0.01 },
            RegimeSpec { kind: factorbt::marketdata::Regime::Bear, length: 60, drift: -0.002, vol: 0.015 },
            RegimeSpec { kind: factorbt::marketdata::Regime::Shock, length: 60, drift: 0.0, vol: 0.012 },
        ],
        ..SynthConfig::default()
    };
    synth_generate(&cfg, seed).unwrap().panel
}

pub fn small_cfg(kind: ModelKind) -> BacktestConfig {
    BacktestConfig {
        train_days: 120,
        test_days: 40,
        model_kind: kind,
        seed: 5,
        regime_lookback: 20,
        train_cfg: TrainConfig {
            window: 5,
            hidden_size: 4,
            epochs: 2,
            learning_rate: 3e-3,
            ..TrainConfig::default()
        },
        ..BacktestConfig::default()
    }
}

/// Simple return of every asset on each factor day (panel day `t + 1`).
pub fn simple_returns(panel: &MarketPanel) -> Vec<Vec<f64>> {
    (0..panel.len() - 1)
        .map(|t| {
            panel
                .assets
                .iter()
                .map(|a| a.prices.close[t + 1] / a.prices.close[t] - 1.0)
                .collect()
        })
        .collect()
}

pub fn brute_drawdown(e: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for u in 0..e.len() {
        for t in 0..=u {
            worst = worst.max(1.0 - e[u] / e[t]);
        }
    }
    worst
}
