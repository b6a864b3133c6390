//! Drawdown, Sharpe ratio, historical VaR and the per-strategy report.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::Day;

pub const TRADING_DAYS: f64 = 252.0;
pub const MIN_VAR_OBSERVATIONS: usize = 20;

/// Portfolio value per day, normalised to start at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EquityCurve {
    pub dates: Vec<Day>,
    pub equity: Vec<f64>,
}

impl EquityCurve {
    pub fn new(dates: Vec<Day>, equity: Vec<f64>) -> Result<EquityCurve> {
        if dates.len() != equity.len() {
            return Err(Error::LengthMismatch {
                expected: dates.len(),
                actual: equity.len(),
            });
        }
        match equity.first() {
            None => return Err(Error::EmptyInput),
            Some(&e0) if e0 != 1.0 => {
                return Err(Error::InvalidParameter(format!("equity must start at 1, got {e0}")))
            }
            _ => {}
        }
        if let Some(bad) = equity.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidParameter(format!("equity must stay positive, got {bad}")));
        }
        Ok(EquityCurve { dates, equity })
    }

    /// Compounds log returns: `equity[t] = exp(Σ_{s≤t} r_s)`, where
    /// `dates[0]` is the start date and `returns[i]` is earned on `dates[i + 1]`.
    pub fn from_log_returns(dates: Vec<Day>, returns: &[f64]) -> Result<EquityCurve> {
        let mut equity = Vec::with_capacity(returns.len() + 1);
        equity.push(1.0);
        let mut acc = 1.0;
        for r in returns {
            acc *= r.exp();
            equity.push(acc);
        }
        EquityCurve::new(dates, equity)
    }

    pub fn max_drawdown(&self) -> f64 {
        max_drawdown(&self.equity)
    }
}

/// Largest `1 − equity_u / peak_u` with `peak_u` the running maximum.
/// Empty and single-point curves give 0.
pub fn max_drawdown(equity: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for &e in equity {
        if e > peak {
            peak = e;
        }
        worst = worst.max(1.0 - e / peak);
    }
    worst
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// `N − 1` denominator; NaN for fewer than two values.
pub fn sample_std(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (x.len() - 1) as f64).sqrt()
}

fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

/// Annualised `(mean − rf/periods) / sample_std · √periods`.
pub fn sharpe(returns: &[f64], rf: f64, periods: f64) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            actual: returns.len(),
        });
    }
    let sd = sample_std(returns);
    if is_constant(returns) || sd == 0.0 {
        return Err(Error::ZeroVolatility);
    }
    Ok((mean(returns) - rf / periods) / sd * periods.sqrt())
}

/// Signed `k`-th smallest return with `k = ⌈(1 − confidence)·N⌉`, no
/// interpolation. A small tolerance keeps exact products such as
/// `0.05 × 20` from rounding up to the next order statistic.
pub fn var_historical(returns: &[f64], confidence: f64) -> Result<f64> {
    if returns.len() < MIN_VAR_OBSERVATIONS {
        return Err(Error::TooFewObservations {
            needed: MIN_VAR_OBSERVATIONS,
            actual: returns.len(),
        });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence {confidence} outside (0, 1)")));
    }
    if returns.iter().any(|r| r.is_nan()) {
        return Err(Error::NonFiniteInput);
    }
    let n = returns.len();
    let k = (((1.0 - confidence) * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let mut sorted = returns.to_vec();
    let (_, kth, _) = sorted.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub max_drawdown: f64,
    /// `None` when the returns have zero volatility.
    pub sharpe: Option<f64>,
    pub var95: f64,
    pub volatility: f64,
    pub ann_return: f64,
    pub mean_daily_return: f64,
}

/// All six metrics from one series of daily log returns.
pub fn risk_report(returns: &[f64], rf: f64, periods: f64) -> Result<RiskReport> {
    if returns.len() < MIN_VAR_OBSERVATIONS {
        return Err(Error::TooFewObservations {
            needed: MIN_VAR_OBSERVATIONS,
            actual: returns.len(),
        });
    }
    let mut equity = Vec::with_capacity(returns.len() + 1);
    equity.push(1.0);
    let mut acc = 1.0;
    for r in returns {
        acc *= r.exp();
        equity.push(acc);
    }
    let sharpe = match sharpe(returns, rf, periods) {
        Ok(s) => Some(s),
        Err(Error::ZeroVolatility) => None,
        Err(e) => return Err(e),
    };
    let sd = if is_constant(returns) { 0.0 } else { sample_std(returns) };
    Ok(RiskReport {
        max_drawdown: max_drawdown(&equity),
        sharpe,
        var95: var_historical(returns, 0.95)?,
        volatility: sd * periods.sqrt(),
        ann_return: acc.powf(periods / returns.len() as f64) - 1.0,
        mean_daily_return: mean(returns),
    })
}

pub const REPORT_HEADER: &str = "strategy,max_drawdown,sharpe,var95,volatility,ann_return,mean_daily_return";

/// One CSV row per named report; decimals, empty sharpe when absent.
pub fn write_reports<W: Write>(rows: &[(String, RiskReport)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER.split(','))?;
    for (name, r) in rows {
        w.write_record([
            name.clone(),
            r.max_drawdown.to_string(),
            r.sharpe.map(|s| s.to_string()).unwrap_or_default(),
            r.var95.to_string(),
            r.volatility.to_string(),
            r.ann_return.to_string(),
            r.mean_daily_return.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_mdd(e: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for u in 0..e.len() {
            for t in 0..=u {
                worst = worst.max(1.0 - e[u] / e[t]);
            }
        }
        worst
    }

    fn sort_var(r: &[f64], pct: usize) -> f64 {
        let n = r.len();
        let k = ((n * (100 - pct) + 99) / 100).max(1);
        let mut s = r.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s[k - 1]
    }

    #[test]
    fn drawdown_examples() {
        assert_eq!(max_drawdown(&[1.0, 1.1, 1.2, 1.5]), 0.0);
        assert_eq!(max_drawdown(&[1.0]), 0.0);
        let e: Vec<f64> = [100.0, 120.0, 90.0, 110.0].iter().map(|v| v / 100.0).collect();
        assert_eq!(max_drawdown(&e), brute_mdd(&e));
        assert!((max_drawdown(&e) - 0.25).abs() < 1e-15);
        assert_eq!(max_drawdown(&[1.0, 0.5, 1.0, 0.25]), 0.75);
    }

    #[test]
    fn sharpe_examples() {
        assert_eq!(sharpe(&[0.01, -0.01, 0.01, -0.01], 0.0, TRADING_DAYS).unwrap(), 0.0);
        assert!(matches!(sharpe(&[0.003; 10], 0.0, TRADING_DAYS), Err(Error::ZeroVolatility)));
        let s = sharpe(&[0.01, 0.02, 0.03], 0.0, TRADING_DAYS).unwrap();
        assert!((s - 2.0 * 252f64.sqrt()).abs() < 1e-12, "{s}");
        assert!(matches!(sharpe(&[0.1], 0.0, 252.0), Err(Error::TooFewObservations { .. })));
    }

    #[test]
    fn var_examples() {
        let r: Vec<f64> = (1..=20).map(|i| -(i as f64) / 100.0).collect();
        assert_eq!(var_historical(&r, 0.95).unwrap(), -0.20);
        assert_eq!(var_historical(&[0.0; 30], 0.95).unwrap(), 0.0);
        assert!(matches!(var_historical(&[0.0; 19], 0.95), Err(Error::TooFewObservations { .. })));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut r: Vec<f64> = (0..95).map(|_| rng.random_range(-0.029..0.03)).collect();
        r.extend([-0.031, -0.045, -0.05, -0.06, -0.08]);
        assert_eq!(var_historical(&r, 0.95).unwrap(), -0.031);
        assert_eq!(sort_var(&r, 95), -0.031);
    }

    #[test]
    fn null_portfolio_report() {
        let r = risk_report(&[0.0; 40], 0.0, TRADING_DAYS).unwrap();
        assert_eq!(r.max_drawdown, 0.0);
        assert_eq!(r.var95, 0.0);
        assert_eq!(r.ann_return, 0.0);
        assert_eq!(r.sharpe, None);
        assert_eq!(r.volatility, 0.0);
    }

    #[test]
    fn report_matches_individual_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(252);
        let r: Vec<f64> = (0..252).map(|_| rng.random_range(-0.03..0.032)).collect();
        let rep = risk_report(&r, 0.01, TRADING_DAYS).unwrap();

        let mut eq = vec![1.0];
        for x in &r {
            let last = *eq.last().unwrap();
            eq.push(last * x.exp());
        }
        assert_eq!(rep.max_drawdown, brute_mdd(&eq));
        assert_eq!(rep.var95, sort_var(&r, 95));
        let m = r.iter().sum::<f64>() / 252.0;
        let sd = (r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 251.0).sqrt();
        assert!((rep.mean_daily_return - m).abs() < 1e-15);
        assert!((rep.volatility - sd * 252f64.sqrt()).abs() < 1e-12);
        assert!((rep.sharpe.unwrap() - (m - 0.01 / 252.0) / sd * 252f64.sqrt()).abs() < 1e-10);
        let total: f64 = r.iter().sum();
        assert!((rep.ann_return - (total.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn curve_validation() {
        let d = |i: u32| Day::from_ymd(2021, 3, i + 1).unwrap();
        assert!(EquityCurve::new(vec![d(0), d(1)], vec![1.0, 0.9]).is_ok());
        assert!(EquityCurve::new(vec![d(0), d(1)], vec![1.1, 0.9]).is_err());
        assert!(EquityCurve::new(vec![d(0), d(1)], vec![1.0, 0.0]).is_err());
        let c = EquityCurve::from_log_returns(vec![d(0), d(1), d(2)], &[0.1, -0.2]).unwrap();
        assert!((c.equity[2] - (-0.1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn csv_row_layout() {
        let rep = risk_report(&[0.0; 20], 0.0, TRADING_DAYS).unwrap();
        let mut buf = Vec::new();
        write_reports(&[("linear".into(), rep)], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, format!("{REPORT_HEADER}\nlinear,0,,0,0,0,0\n"));
    }

    fn curve() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-0.2f64..0.2, 1..200).prop_map(|r| {
            let mut e = vec![1.0];
            for x in r {
                let last = *e.last().unwrap();
                e.push(last * (1.0 + x));
            }
            e
        })
    }

    proptest! {
        #[test]
        fn drawdown_equals_brute_force(e in curve()) {
            let d = max_drawdown(&e);
            prop_assert_eq!(d, brute_mdd(&e));
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn drawdown_scale_invariant(e in curve(), p in -8i32..8, c in 0.01f64..100.0) {
            let pow2: Vec<f64> = e.iter().map(|v| v * 2f64.powi(p)).collect();
            prop_assert_eq!(max_drawdown(&pow2), max_drawdown(&e));
            let scaled: Vec<f64> = e.iter().map(|v| v * c).collect();
            prop_assert!((max_drawdown(&scaled) - max_drawdown(&e)).abs() < 1e-12);
        }

        #[test]
        fn new_high_never_increases_drawdown(e in curve(), bump in 1.0f64..1.5) {
            let mut longer = e.clone();
            let peak = e.iter().cloned().fold(f64::MIN, f64::max);
            longer.push(peak * bump);
            prop_assert!(max_drawdown(&longer) <= max_drawdown(&e));
        }

        #[test]
        fn var_equals_order_statistic(
            r in prop::collection::vec(-0.1f64..0.1, 20..=200),
            pct in prop::sample::select(vec![90usize, 95, 99]),
        ) {
            prop_assert_eq!(var_historical(&r, pct as f64 / 100.0).unwrap(), sort_var(&r, pct));
        }

        #[test]
        fn var_not_above_median(r in prop::collection::vec(-0.1f64..0.1, 20..=200)) {
            let rep = risk_report(&r, 0.0, TRADING_DAYS).unwrap();
            let mut s = r.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = s.len();
            let median = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
            prop_assert!(rep.var95 <= median);
        }

        #[test]
        fn sharpe_shift_invariance(r in prop::collection::vec(-0.05f64..0.05, 3..100), rf in -0.05f64..0.1) {
            prop_assume!(!is_constant(&r));
            let base = sharpe(&r, 0.0, TRADING_DAYS).unwrap();
            let shifted: Vec<f64> = r.iter().map(|x| x + rf / TRADING_DAYS).collect();
            let s = sharpe(&shifted, rf, TRADING_DAYS).unwrap();
            prop_assert!((s - base).abs() < 1e-12, "{} vs {}", s, base);
        }
    }
}
