use std::io::Write;

use crate::error::{Error, Result};
use crate::marketdata::MarketPanel;
use crate::risk::RiskReport;

use super::config::{BacktestConfig, ModelKind};
use super::engine::walk_forward;

pub const LADDER: [usize; 5] = [0, 1, 2, 3, 4];
pub const SWEEP_HEADER: &str = "degree,ann_return,sharpe";

/// Configuration of ladder rung `degree`: 0 linear without risk scaling,
/// 1 LSTM, 2 plus volatility targeting, 3 plus drawdown control,
/// 4 plus doubled training epochs. Limits come from `base`, falling back
/// to the defaults when `base` leaves them unset.
pub fn rung_config(base: &BacktestConfig, degree: usize) -> Result<BacktestConfig> {
    if degree >= LADDER.len() {
        return Err(Error::InvalidParameter(format!("no ladder rung {degree}")));
    }
    let defaults = BacktestConfig::default();
    let mut cfg = base.clone();
    cfg.model_kind = if degree == 0 { ModelKind::Linear } else { ModelKind::Lstm };
    cfg.vol_target = (degree >= 2).then(|| base.vol_target.or(defaults.vol_target)).flatten();
    cfg.drawdown_limit = (degree >= 3).then(|| base.drawdown_limit.or(defaults.drawdown_limit)).flatten();
    if degree >= 4 {
        cfg.train_cfg.epochs = base.train_cfg.epochs * 2;
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub degree: usize,
    pub report: RiskReport,
}

/// One walk-forward per requested rung. Rungs run on separate threads and
/// are returned in request order.
pub fn optimization_sweep(panel: &MarketPanel, base: &BacktestConfig, degrees: &[usize]) -> Result<Vec<SweepRow>> {
    if degrees.is_empty() {
        return Err(Error::InvalidParameter("empty ladder".into()));
    }
    let configs = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| rung_config(base, d).map_err(|e| e.in_rung(i)))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<RiskReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| s.spawn(move || walk_forward(panel, cfg).map(|r| r.overall)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    });
    results
        .into_iter()
        .zip(degrees)
        .enumerate()
        .map(|(i, (r, &degree))| {
            r.map(|report| SweepRow { degree, report })
                .map_err(|e| e.in_rung(i))
        })
        .collect()
}

/// Sharpe is left empty when undefined.
pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER.split(','))?;
    for r in rows {
        w.write_record([
            r.degree.to_string(),
            r.report.ann_return.to_string(),
            r.report.sharpe.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
