use std::ops::Range;

use crate::error::{Error, Result};
use crate::factors::{fit_ols, predict_linear, screen_factors, LinearModel};
use crate::lstm::{self, make_windows_ending, window_inputs, LstmParams, TrainConfig};
use crate::marketdata::{
    asset_returns, compute_factors, log_returns, varying_factors, Day, FactorPanel, MarketPanel, Regime, ReturnPanel,
    Standardizer,
};
use crate::risk::{mean, risk_report, sample_std, EquityCurve, RiskReport, TRADING_DAYS};

use super::config::{BacktestConfig, ModelKind};
use super::portfolio::{apply_risk_constraints, construct_portfolio};
use super::regime::classify_regimes;

/// Factor-day indices of one walk-forward fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// Folds start every `test_days`; the last test window may be short.
pub fn fold_plan(n_days: usize, train_days: usize, test_days: usize) -> Vec<Fold> {
    let mut folds = Vec::new();
    let mut s = 0;
    while s + train_days < n_days {
        let test_start = s + train_days;
        folds.push(Fold {
            train: s..test_start,
            test: test_start..(test_start + test_days).min(n_days),
        });
        s += test_days;
    }
    folds
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldSummary {
    pub fold: usize,
    pub train_start: Day,
    pub train_end: Day,
    pub test_start: Day,
    pub test_end: Day,
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub days: usize,
    pub report: RiskReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub model: ModelKind,
    pub asset_ids: Vec<String>,
    /// Starts at 1.0 on the day before the first out-of-sample day.
    pub equity: EquityCurve,
    /// Final weights held over each out-of-sample day.
    pub weights_history: Vec<Vec<f64>>,
    /// Simple portfolio return of each out-of-sample day.
    pub daily_returns: Vec<f64>,
    pub regimes: Vec<Option<Regime>>,
    /// Regimes with fewer than 20 labeled days are omitted.
    pub per_regime: Vec<RegimeReport>,
    pub overall: RiskReport,
    /// Predicted and realised log returns, day-major over out-of-sample days.
    pub predictions: Vec<f64>,
    pub realized: Vec<f64>,
    pub folds: Vec<FoldSummary>,
}

impl BacktestResult {
    pub fn oos_dates(&self) -> &[Day] {
        &self.equity.dates[1..]
    }

    pub fn prediction_mse(&self) -> Result<f64> {
        lstm::mse_loss(&self.predictions, &self.realized)
    }

    pub fn regime_report(&self, regime: Regime) -> Option<&RiskReport> {
        self.per_regime.iter().find(|r| r.regime == regime).map(|r| &r.report)
    }
}

enum Predictor {
    Linear(LinearModel),
    Lstm {
        params: LstmParams,
        window: usize,
        target_mean: f64,
        target_scale: f64,
    },
}

struct FittedFold {
    features: FactorPanel,
    selected: Vec<String>,
    predictor: Predictor,
}

impl FittedFold {
    /// Drop constant factors, standardise on the train window, screen,
    /// then fit. Only returns realised inside the train window are used.
    fn fit(factors: &FactorPanel, returns: &ReturnPanel, train: Range<usize>, cfg: &BacktestConfig, fold: usize) -> Result<FittedFold> {
        let live = varying_factors(factors, train.clone());
        if live.is_empty() {
            return Err(Error::NoFactorsSurvive);
        }
        let raw = factors.select(&live)?;
        let standardized = Standardizer::fit(&raw, train.clone())?.apply(&raw)?;
        let pairs = train.start..train.end - 1;
        let (selected, _) = screen_factors(&standardized, returns, pairs.clone(), &cfg.screen)?;
        let features = standardized.select(&selected)?;
        let predictor = match cfg.model_kind {
            ModelKind::Linear => Predictor::Linear(fit_ols(&features, returns, pairs)?),
            ModelKind::Lstm => {
                let window = cfg.train_cfg.window;
                let mut samples = make_windows_ending(&features, returns, window, train.start + window - 1..pairs.end)?;
                let targets: Vec<f64> = samples.iter().map(|s| s.target).collect();
                let target_mean = mean(&targets);
                let sd = (targets.iter().map(|y| (y - target_mean).powi(2)).sum::<f64>() / targets.len() as f64).sqrt();
                let target_scale = if sd > 0.0 { sd } else { 1.0 };
                for s in &mut samples {
                    s.target = (s.target - target_mean) / target_scale;
                }
                let tcfg = TrainConfig {
                    seed: cfg.seed.wrapping_add(fold as u64),
                    ..cfg.train_cfg.clone()
                };
                let outcome = lstm::train(&samples, &tcfg)?;
                Predictor::Lstm {
                    params: outcome.params,
                    window,
                    target_mean,
                    target_scale,
                }
            }
        };
        Ok(FittedFold {
            features,
            selected,
            predictor,
        })
    }

    /// Predicted returns for day `d + 1` from information through day `d`.
    fn predict(&self, d: usize) -> Result<Vec<f64>> {
        (0..self.features.n_assets())
            .map(|a| match &self.predictor {
                Predictor::Linear(m) => predict_linear(m, self.features.row(d, a)),
                Predictor::Lstm {
                    params,
                    window,
                    target_mean,
                    target_scale,
                } => {
                    let x = window_inputs(&self.features, a, d, *window);
                    Ok(lstm::predict(params, &x)? * target_scale + target_mean)
                }
            })
            .collect()
    }
}

/// Trailing annualised sample volatility once `window` values exist, else 0.
fn trailing_vol(history: &[f64], window: usize) -> f64 {
    if history.len() < window {
        return 0.0;
    }
    sample_std(&history[history.len() - window..]) * TRADING_DAYS.sqrt()
}

/// Rolling refit-and-trade over the panel. The weights held on day `t`
/// depend only on data through day `t − 1`.
pub fn walk_forward(panel: &MarketPanel, cfg: &BacktestConfig) -> Result<BacktestResult> {
    cfg.validate()?;
    let factors = compute_factors(panel)?;
    let returns = asset_returns(panel)?;
    let n_days = factors.n_days();
    if n_days < cfg.train_days + cfg.test_days {
        return Err(Error::InsufficientData(format!(
            "{n_days} return days available, train_days + test_days = {}",
            cfg.train_days + cfg.test_days
        )));
    }
    let index_returns = log_returns(&panel.market_index)?.returns;
    let labels = classify_regimes(&index_returns, cfg.regime_lookback, cfg.regime_threshold)?;
    let n_assets = factors.n_assets();
    let folds = fold_plan(n_days, cfg.train_days, cfg.test_days);
    let first_oos = folds[0].test.start;

    let mut equity = vec![1.0];
    let mut peak = 1.0f64;
    let mut base_returns = Vec::new();
    let mut daily_returns = Vec::new();
    let mut weights_history = Vec::new();
    let mut predictions = Vec::new();
    let mut realized = Vec::new();
    let mut summaries = Vec::new();
    let mut held = vec![0.0; n_assets];

    for (k, fold) in folds.iter().enumerate() {
        let fitted = FittedFold::fit(&factors, &returns, fold.train.clone(), cfg, k).map_err(|e| e.in_fold(k))?;
        for t in fold.test.clone() {
            let preds = fitted.predict(t - 1).map_err(|e| e.in_fold(k))?;
            let base = construct_portfolio(&preds, &factors.asset_ids, cfg.top_fraction);
            let current = *equity.last().unwrap();
            let weights = apply_risk_constraints(
                &base,
                trailing_vol(&base_returns, cfg.vol_window),
                1.0 - current / peak,
                cfg,
            );
            let simple: Vec<f64> = returns.day(t).iter().map(|r| r.exp_m1()).collect();
            let dot = |w: &[f64]| w.iter().zip(&simple).map(|(a, b)| a * b).sum::<f64>();
            let turnover: f64 = weights.iter().zip(&held).map(|(a, b)| (a - b).abs()).sum();
            let p = dot(&weights) - cfg.transaction_cost * turnover;

            base_returns.push(dot(&base));
            daily_returns.push(p);
            let next = current * (1.0 + p);
            equity.push(next);
            peak = peak.max(next);
            predictions.extend_from_slice(&preds);
            realized.extend_from_slice(returns.day(t));
            held.clone_from(&weights);
            weights_history.push(weights);
        }
        summaries.push(FoldSummary {
            fold: k,
            train_start: factors.calendar[fold.train.start],
            train_end: factors.calendar[fold.train.end - 1],
            test_start: factors.calendar[fold.test.start],
            test_end: factors.calendar[fold.test.end - 1],
            selected: fitted.selected,
        });
    }

    let oos = first_oos..n_days;
    let log_p: Vec<f64> = daily_returns.iter().map(|p| p.ln_1p()).collect();
    let regimes = labels[oos.clone()].to_vec();
    let mut per_regime = Vec::new();
    for regime in Regime::ALL {
        let subset: Vec<f64> = log_p
            .iter()
            .zip(&regimes)
            .filter(|(_, l)| **l == Some(regime))
            .map(|(r, _)| *r)
            .collect();
        if subset.len() >= crate::risk::MIN_VAR_OBSERVATIONS {
            per_regime.push(RegimeReport {
                regime,
                days: subset.len(),
                report: risk_report(&subset, cfg.risk_free_rate, TRADING_DAYS)?,
            });
        }
    }
    let overall = risk_report(&log_p, cfg.risk_free_rate, TRADING_DAYS)?;
    let dates: Vec<Day> = factors.calendar[first_oos - 1..n_days].to_vec();

    Ok(BacktestResult {
        model: cfg.model_kind,
        asset_ids: factors.asset_ids.clone(),
        equity: EquityCurve::new(dates, equity)?,
        weights_history,
        daily_returns,
        regimes,
        per_regime,
        overall,
        predictions,
        realized,
        folds: summaries,
    })
}
