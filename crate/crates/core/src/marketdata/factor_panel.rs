//! The five-factor set and its per-day, per-asset storage.

use std::collections::HashSet;
use std::ops::Range;

use crate::error::{Error, Result};

use super::calendar::Day;
use super::series::{log_returns, MarketPanel};

pub const MARKET_RETURN: &str = "market_return";
pub const INDUSTRY_RETURN: &str = "industry_return";
pub const PE_RATIO: &str = "pe_ratio";
pub const PB_RATIO: &str = "pb_ratio";
pub const LOG_VOLUME: &str = "log_volume";

/// Factor order produced by [`compute_factors`].
pub const FACTOR_NAMES: [&str; 5] = [MARKET_RETURN, INDUSTRY_RETURN, PE_RATIO, PB_RATIO, LOG_VOLUME];

/// Day × asset × factor matrix, row-major in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPanel {
    pub factor_names: Vec<String>,
    pub asset_ids: Vec<String>,
    pub calendar: Vec<Day>,
    values: Vec<f64>,
}

impl FactorPanel {
    pub fn new(factor_names: Vec<String>, asset_ids: Vec<String>, calendar: Vec<Day>, values: Vec<f64>) -> Result<Self> {
        let unique: HashSet<&String> = factor_names.iter().collect();
        if unique.len() != factor_names.len() {
            return Err(Error::InvalidParameter("factor names must be unique".into()));
        }
        let expected = calendar.len() * asset_ids.len() * factor_names.len();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(FactorPanel {
            factor_names,
            asset_ids,
            calendar,
            values,
        })
    }

    pub fn n_days(&self) -> usize {
        self.calendar.len()
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn n_factors(&self) -> usize {
        self.factor_names.len()
    }

    pub fn value(&self, day: usize, asset: usize, factor: usize) -> f64 {
        self.values[(day * self.n_assets() + asset) * self.n_factors() + factor]
    }

    /// The factor vector of one asset on one day.
    pub fn row(&self, day: usize, asset: usize) -> &[f64] {
        let n = self.n_factors();
        let start = (day * self.n_assets() + asset) * n;
        &self.values[start..start + n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factor_names.iter().position(|f| f == name)
    }

    /// One factor's values pooled over `days` × all assets (day-major).
    pub fn pooled_column(&self, factor: usize, days: Range<usize>) -> Vec<f64> {
        let mut out = Vec::with_capacity(days.len() * self.n_assets());
        for d in days {
            for a in 0..self.n_assets() {
                out.push(self.value(d, a, factor));
            }
        }
        out
    }

    /// Subset of factors in the given order.
    pub fn select(&self, names: &[String]) -> Result<FactorPanel> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.factor_index(n)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown factor `{n}`")))
            })
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(self.n_days() * self.n_assets() * idx.len());
        for d in 0..self.n_days() {
            for a in 0..self.n_assets() {
                let row = self.row(d, a);
                values.extend(idx.iter().map(|&i| row[i]));
            }
        }
        FactorPanel::new(names.to_vec(), self.asset_ids.clone(), self.calendar.clone(), values)
    }

    /// Index range of the days falling in `[start, end]` (inclusive).
    pub fn day_range(&self, start: Day, end: Day) -> Range<usize> {
        let lo = self.calendar.partition_point(|d| *d < start);
        let hi = self.calendar.partition_point(|d| *d <= end);
        lo..hi.max(lo)
    }
}

/// Daily log returns of every asset on the factor calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub asset_ids: Vec<String>,
    pub calendar: Vec<Day>,
    /// Day-major.
    values: Vec<f64>,
}

impl ReturnPanel {
    pub fn new(asset_ids: Vec<String>, calendar: Vec<Day>, values: Vec<f64>) -> Result<Self> {
        let expected = asset_ids.len() * calendar.len();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(ReturnPanel {
            asset_ids,
            calendar,
            values,
        })
    }

    pub fn n_days(&self) -> usize {
        self.calendar.len()
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn get(&self, day: usize, asset: usize) -> f64 {
        self.values[day * self.n_assets() + asset]
    }

    pub fn day(&self, day: usize) -> &[f64] {
        let n = self.n_assets();
        &self.values[day * n..(day + 1) * n]
    }

    /// Returns one day ahead, pooled the same way as
    /// [`FactorPanel::pooled_column`]: the entry for day `d` is the return on `d + 1`.
    pub fn pooled_forward(&self, days: Range<usize>) -> Vec<f64> {
        let mut out = Vec::with_capacity(days.len() * self.n_assets());
        for d in days {
            out.extend_from_slice(self.day(d + 1));
        }
        out
    }
}

/// Asset log returns aligned with [`compute_factors`] output.
pub fn asset_returns(panel: &MarketPanel) -> Result<ReturnPanel> {
    let n_days = panel.len().saturating_sub(1);
    let per_asset: Vec<Vec<f64>> = panel
        .assets
        .iter()
        .map(|a| log_returns(&a.prices).map(|r| r.returns))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(n_days * per_asset.len());
    for d in 0..n_days {
        values.extend(per_asset.iter().map(|r| r[d]));
    }
    ReturnPanel::new(panel.asset_ids(), panel.calendar[1..].to_vec(), values)
}

/// Market-index return, industry-index return, P/E, P/B and `ln(1 + volume)`
/// per asset-day, on the return calendar (the panel calendar minus its first day).
pub fn compute_factors(panel: &MarketPanel) -> Result<FactorPanel> {
    let market = log_returns(&panel.market_index)?.returns;
    let mut industry = std::collections::BTreeMap::new();
    for (name, s) in &panel.industry_index {
        industry.insert(name.as_str(), log_returns(s)?.returns);
    }
    let n_days = market.len();
    let n_assets = panel.assets.len();
    let mut per_asset = Vec::with_capacity(n_assets);
    for a in &panel.assets {
        let f = a
            .fundamentals
            .as_ref()
            .ok_or_else(|| Error::MissingFundamental(a.id().to_string()))?;
        if f.pe.len() != panel.len() || f.pb.len() != panel.len() {
            return Err(Error::MissingFundamental(a.id().to_string()));
        }
        let ind = industry
            .get(a.industry.as_str())
            .ok_or_else(|| Error::Malformed(format!("no industry index `{}` for asset `{}`", a.industry, a.id())))?;
        per_asset.push((f, ind));
    }
    let mut values = Vec::with_capacity(n_days * n_assets * FACTOR_NAMES.len());
    for d in 0..n_days {
        let t = d + 1;
        for (a, (f, ind)) in panel.assets.iter().zip(&per_asset) {
            values.extend_from_slice(&[market[d], ind[d], f.pe[t], f.pb[t], a.prices.volume[t].ln_1p()]);
        }
    }
    FactorPanel::new(
        FACTOR_NAMES.iter().map(|s| s.to_string()).collect(),
        panel.asset_ids(),
        panel.calendar[1..].to_vec(),
        values,
    )
}

/// Standard deviations below this count as constant factors.
pub const MIN_FACTOR_STD: f64 = 1e-12;

fn column_moments(panel: &FactorPanel, f: usize, days: Range<usize>) -> (f64, f64) {
    let col = panel.pooled_column(f, days);
    let n = col.len() as f64;
    let m = col.iter().sum::<f64>() / n;
    let s = (col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
    (m, s)
}

/// Names of factors whose pooled standard deviation over `days` is at
/// least [`MIN_FACTOR_STD`], in panel order.
pub fn varying_factors(panel: &FactorPanel, days: Range<usize>) -> Vec<String> {
    (0..panel.n_factors())
        .filter(|&f| column_moments(panel, f, days.clone()).1 >= MIN_FACTOR_STD)
        .map(|f| panel.factor_names[f].clone())
        .collect()
}

/// Per-factor mean and population standard deviation over a fit range.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub factor_names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(panel: &FactorPanel, fit_range: Range<usize>) -> Result<Standardizer> {
        if fit_range.end > panel.n_days() || fit_range.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "fit range {fit_range:?} must hold at least 2 of {} days",
                panel.n_days()
            )));
        }
        let mut mean = Vec::with_capacity(panel.n_factors());
        let mut std = Vec::with_capacity(panel.n_factors());
        for f in 0..panel.n_factors() {
            let (m, s) = column_moments(panel, f, fit_range.clone());
            if !(s >= MIN_FACTOR_STD) {
                return Err(Error::ZeroVarianceFactor(panel.factor_names[f].clone()));
            }
            mean.push(m);
            std.push(s);
        }
        Ok(Standardizer {
            factor_names: panel.factor_names.clone(),
            mean,
            std,
        })
    }

    pub fn apply(&self, panel: &FactorPanel) -> Result<FactorPanel> {
        if panel.factor_names != self.factor_names {
            return Err(Error::InvalidParameter("standardizer fitted on different factors".into()));
        }
        let k = self.mean.len();
        let values = panel
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let f = i % k;
                (v - self.mean[f]) / self.std[f]
            })
            .collect();
        FactorPanel::new(panel.factor_names.clone(), panel.asset_ids.clone(), panel.calendar.clone(), values)
    }

    pub fn apply_row(&self, row: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(row.iter().zip(self.mean.iter().zip(&self.std)).map(|(v, (m, s))| (v - m) / s));
    }
}

/// Z-scores every factor with statistics estimated only over `fit_range`.
pub fn standardize(panel: &FactorPanel, fit_range: Range<usize>) -> Result<FactorPanel> {
    Standardizer::fit(panel, fit_range)?.apply(panel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marketdata::calendar::weekday_calendar;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn cal(n: usize) -> Vec<Day> {
        weekday_calendar(NaiveDate::from_ymd_opt(2021, 1, 4).unwrap(), n)
    }

    fn single(values: Vec<f64>) -> FactorPanel {
        let n = values.len();
        FactorPanel::new(vec!["f".into()], vec!["A".into()], cal(n), values).unwrap()
    }

    #[test]
    fn one_two_three() {
        let z = standardize(&single(vec![1.0, 2.0, 3.0]), 0..3).unwrap();
        let expected = 1.5f64.sqrt(); // (3-2)/sqrt(2/3)
        assert!((z.value(0, 0, 0) + expected).abs() < 1e-15);
        assert_eq!(z.value(1, 0, 0), 0.0);
        assert!((z.value(2, 0, 0) - expected).abs() < 1e-15);
        assert!((expected - 1.224_744_871_391_589).abs() < 1e-15);
    }

    #[test]
    fn constant_factor_rejected() {
        assert!(matches!(
            standardize(&single(vec![4.0; 5]), 0..5),
            Err(Error::ZeroVarianceFactor(name)) if name == "f"
        ));
    }

    #[test]
    fn standardized_input_is_a_fixed_point() {
        let z = standardize(&single(vec![0.3, -1.2, 2.0, 0.1, -0.7, 0.9]), 0..6).unwrap();
        let zz = standardize(&z, 0..6).unwrap();
        for d in 0..6 {
            assert!((z.value(d, 0, 0) - zz.value(d, 0, 0)).abs() < 1e-9);
        }
    }

    #[test]
    fn select_keeps_requested_order() {
        let p = FactorPanel::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["X".into()],
            cal(2),
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        )
        .unwrap();
        let s = p.select(&["c".into(), "a".into()]).unwrap();
        assert_eq!(s.row(1, 0), &[6.0, 4.0]);
        assert!(p.select(&["zz".into()]).is_err());
        assert!(FactorPanel::new(vec!["a".into(), "a".into()], vec!["X".into()], cal(1), vec![0.0; 2]).is_err());
    }

    proptest! {
        #[test]
        fn fit_range_moments_and_no_look_ahead(
            values in prop::collection::vec(-100.0f64..100.0, 12..60),
            perturb in -50.0f64..50.0,
        ) {
            let n = values.len();
            let fit = 0..n / 2;
            let p = single(values.clone());
            prop_assume!(Standardizer::fit(&p, fit.clone()).is_ok());
            let z = standardize(&p, fit.clone()).unwrap();
            let col = z.pooled_column(0, fit.clone());
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let s = (col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / col.len() as f64).sqrt();
            prop_assert!(m.abs() < 1e-9);
            prop_assert!((s - 1.0).abs() < 1e-9);

            let mut shifted = values;
            shifted[n - 1] += perturb;
            let z2 = standardize(&single(shifted), fit.clone()).unwrap();
            for d in fit {
                prop_assert_eq!(z.value(d, 0, 0).to_bits(), z2.value(d, 0, 0).to_bits());
            }
        }
    }
}
