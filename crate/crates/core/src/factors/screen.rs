use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::{FactorPanel, ReturnPanel};

use super::stats::FactorStats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenConfig {
    #[serde(default = "default_min_abs_ic")]
    pub min_abs_ic: f64,
    #[serde(default = "default_max_pairwise_corr")]
    pub max_pairwise_corr: f64,
}

fn default_min_abs_ic() -> f64 {
    0.02
}

fn default_max_pairwise_corr() -> f64 {
    0.8
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            min_abs_ic: default_min_abs_ic(),
            max_pairwise_corr: default_max_pairwise_corr(),
        }
    }
}

impl ScreenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_abs_ic) {
            return Err(Error::InvalidParameter("min_abs_ic must lie in [0, 1]".into()));
        }
        if !(self.max_pairwise_corr > 0.0 && self.max_pairwise_corr < 1.0) {
            return Err(Error::InvalidParameter("max_pairwise_corr must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Applies the IC floor and the collinearity cap to precomputed statistics.
///
/// Candidates are visited in decreasing `|IC|` (ties in factor order) and
/// kept unless correlated above the cap with an already-kept factor, so of
/// any over-correlated pair the weaker one goes. Survivors keep input order.
pub fn select_factors(stats: &FactorStats, cfg: &ScreenConfig) -> Result<Vec<String>> {
    cfg.validate()?;
    let mut order: Vec<usize> = (0..stats.factor_names.len())
        .filter(|&i| stats.ic[i].abs() >= cfg.min_abs_ic)
        .collect();
    order.sort_by(|&a, &b| stats.ic[b].abs().total_cmp(&stats.ic[a].abs()).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&j| stats.pairwise_corr[i][j].abs() <= cfg.max_pairwise_corr) {
            kept.push(i);
        }
    }
    if kept.is_empty() {
        return Err(Error::NoFactorsSurvive);
    }
    kept.sort_unstable();
    Ok(kept.into_iter().map(|i| stats.factor_names[i].clone()).collect())
}

/// Screens factors on the pooled asset-days of `days`, pairing factor day
/// `d` with the return of day `d + 1`.
pub fn screen_factors(
    panel: &FactorPanel,
    returns: &ReturnPanel,
    days: Range<usize>,
    cfg: &ScreenConfig,
) -> Result<(Vec<String>, FactorStats)> {
    if days.end >= returns.n_days() {
        return Err(Error::InvalidParameter(format!("screen range {days:?} needs a following return day")));
    }
    let fwd = returns.pooled_forward(days.clone());
    let columns: Vec<Vec<f64>> = (0..panel.n_factors()).map(|f| panel.pooled_column(f, days.clone())).collect();
    let stats = FactorStats::compute(panel.factor_names.clone(), &columns, &fwd)?;
    let selected = select_factors(&stats, cfg)?;
    Ok((selected, stats))
}
