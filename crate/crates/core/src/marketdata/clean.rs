//! Gap filling and MAD winsorization.
//!
//! Order of operations for a panel:
//! 1. rows before the first day on which every column is observed are dropped;
//! 2. interior gaps are linearly interpolated, trailing gaps forward-filled;
//! 3. level columns (volume, P/E, P/B) are clipped to `median ± k·MAD`;
//!    price columns are clipped in one-day log-return space and the path is
//!    rebuilt from its first close, so trends are never mistaken for outliers.
//!
//! Non-positive closes and negative volumes are treated as missing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::series::{AssetRecord, Fundamentals, MarketPanel, PriceSeries};

/// Relative slack on the clip boundary for price columns. Rebuilding a price
/// path perturbs recomputed returns by a few ulps; without slack a second
/// pass would re-clip them.
const RETURN_CLIP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanPolicy {
    /// `k` in `median ± k·MAD`.
    #[serde(default = "default_mad_threshold")]
    pub mad_threshold: f64,
}

fn default_mad_threshold() -> f64 {
    5.0
}

impl Default for CleanPolicy {
    fn default() -> Self {
        CleanPolicy {
            mad_threshold: default_mad_threshold(),
        }
    }
}

impl CleanPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.mad_threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mad_threshold must be > 0, got {}",
                self.mad_threshold
            )));
        }
        Ok(())
    }
}

/// Median of a non-empty slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Unscaled median absolute deviation around `center`.
pub fn mad(values: &[f64], center: f64) -> f64 {
    let dev: Vec<f64> = values.iter().map(|x| (x - center).abs()).collect();
    median(&dev)
}

/// `(median − k·MAD, median + k·MAD)` over `values`.
pub fn mad_bounds(values: &[f64], k: f64) -> (f64, f64) {
    let m = median(values);
    let d = mad(values, m);
    (m - k * d, m + k * d)
}

/// Clips every value outside `median ± k·MAD` to the boundary. Returns the
/// number of clipped values. Idempotent for `k ≥ 1`.
pub fn winsorize_mad(values: &mut [f64], k: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    let (lo, hi) = mad_bounds(values, k);
    clip_to(values, lo, hi, 0.0)
}

fn clip_to(values: &mut [f64], lo: f64, hi: f64, slack: f64) -> usize {
    let lo_s = lo - slack * lo.abs();
    let hi_s = hi + slack * hi.abs();
    let mut clipped = 0;
    for v in values.iter_mut() {
        if *v > hi_s {
            *v = hi;
            clipped += 1;
        } else if *v < lo_s {
            *v = lo;
            clipped += 1;
        }
    }
    clipped
}

/// Winsorizes a price path in log-return space. Prices are rebuilt from the
/// first close only when some return was actually clipped.
pub fn winsorize_price_returns(close: &mut [f64], k: f64) -> usize {
    if close.len() < 3 {
        return 0;
    }
    let mut returns: Vec<f64> = close.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let (lo, hi) = mad_bounds(&returns, k);
    let clipped = clip_to(&mut returns, lo, hi, RETURN_CLIP_SLACK);
    if clipped > 0 {
        for (t, r) in returns.iter().enumerate() {
            close[t + 1] = close[t] * r.exp();
        }
    }
    clipped
}

/// Index of the first observed (finite) value.
fn first_observed(values: &[f64]) -> Option<usize> {
    values.iter().position(|v| v.is_finite())
}

/// Linearly interpolates interior gaps and forward-fills trailing ones.
/// Leading gaps are left untouched (the caller drops those rows).
pub fn fill_gaps(values: &mut [f64]) {
    let mut last: Option<usize> = None;
    let n = values.len();
    let mut t = 0;
    while t < n {
        if values[t].is_finite() {
            last = Some(t);
            t += 1;
            continue;
        }
        let next = (t..n).find(|&u| values[u].is_finite());
        match (last, next) {
            (Some(a), Some(b)) => {
                let (va, vb) = (values[a], values[b]);
                let span = (b - a) as f64;
                for u in t..b {
                    let w = (u - a) as f64 / span;
                    values[u] = va + (vb - va) * w;
                }
                t = b;
            }
            (Some(a), None) => {
                let va = values[a];
                values[t..].iter_mut().for_each(|v| *v = va);
                t = n;
            }
            (None, _) => t += 1,
        }
    }
}

fn as_missing_if(values: &[f64], bad: impl Fn(f64) -> bool) -> Vec<f64> {
    values.iter().map(|&v| if bad(v) { f64::NAN } else { v }).collect()
}

enum ColumnKind {
    Price,
    Level,
}

struct Column {
    name: String,
    kind: ColumnKind,
    values: Vec<f64>,
}

/// Produces a gap-free, winsorized copy of `panel`.
pub fn clean(panel: &MarketPanel, policy: &CleanPolicy) -> Result<MarketPanel> {
    policy.validate()?;
    if panel.is_empty() || panel.assets.is_empty() {
        return Err(Error::Malformed("panel is empty".into()));
    }
    let n = panel.len();

    let mut columns: Vec<Column> = Vec::new();
    let push_series = |s: &PriceSeries, columns: &mut Vec<Column>, with_volume: bool| -> Result<()> {
        if s.close.len() != n || s.volume.len() != n {
            return Err(Error::Malformed(format!("series `{}` is misaligned", s.asset_id)));
        }
        columns.push(Column {
            name: format!("{}:close", s.asset_id),
            kind: ColumnKind::Price,
            values: as_missing_if(&s.close, |v| !(v > 0.0) || !v.is_finite()),
        });
        if with_volume {
            columns.push(Column {
                name: format!("{}:volume", s.asset_id),
                kind: ColumnKind::Level,
                values: as_missing_if(&s.volume, |v| !(v >= 0.0) || !v.is_finite()),
            });
        }
        Ok(())
    };
    for a in &panel.assets {
        push_series(&a.prices, &mut columns, true)?;
        if let Some(f) = &a.fundamentals {
            if f.pe.len() != n || f.pb.len() != n {
                return Err(Error::Malformed(format!("fundamentals of `{}` are misaligned", a.id())));
            }
            for (label, v) in [("pe_ratio", &f.pe), ("pb_ratio", &f.pb)] {
                columns.push(Column {
                    name: format!("{}:{label}", a.id()),
                    kind: ColumnKind::Level,
                    values: as_missing_if(v, |x| !x.is_finite()),
                });
            }
        }
    }
    push_series(&panel.market_index, &mut columns, false)?;
    for s in panel.industry_index.values() {
        push_series(s, &mut columns, false)?;
    }

    let mut lead = 0;
    for c in &columns {
        match first_observed(&c.values) {
            Some(i) => lead = lead.max(i),
            None => return Err(Error::AllMissingColumn(c.name.clone())),
        }
    }

    for c in columns.iter_mut() {
        c.values.drain(..lead);
        fill_gaps(&mut c.values);
        match c.kind {
            ColumnKind::Level => winsorize_mad(&mut c.values, policy.mad_threshold),
            ColumnKind::Price => winsorize_price_returns(&mut c.values, policy.mad_threshold),
        };
    }

    // Reassemble in the same order the columns were pushed.
    let calendar = panel.calendar[lead..].to_vec();
    let mut it = columns.into_iter().map(|c| c.values);
    let rebuild = |s: &PriceSeries, it: &mut dyn Iterator<Item = Vec<f64>>, with_volume: bool| PriceSeries {
        asset_id: s.asset_id.clone(),
        dates: calendar.clone(),
        close: it.next().expect("close column"),
        volume: if with_volume {
            it.next().expect("volume column")
        } else {
            s.volume[lead..].iter().map(|v| if v.is_finite() { v.max(0.0) } else { 0.0 }).collect()
        },
    };
    let mut assets = Vec::with_capacity(panel.assets.len());
    for a in &panel.assets {
        let prices = rebuild(&a.prices, &mut it, true);
        let fundamentals = a.fundamentals.as_ref().map(|_| Fundamentals {
            pe: it.next().expect("pe column"),
            pb: it.next().expect("pb column"),
        });
        assets.push(AssetRecord {
            prices,
            industry: a.industry.clone(),
            fundamentals,
        });
    }
    let market_index = rebuild(&panel.market_index, &mut it, false);
    let industry_index = panel
        .industry_index
        .iter()
        .map(|(k, s)| (k.clone(), rebuild(s, &mut it, false)))
        .collect();

    let out = MarketPanel {
        calendar,
        assets,
        market_index,
        industry_index,
    };
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marketdata::calendar::{weekday_calendar, Day};
    use chrono::NaiveDate;
    use std::collections::BTreeMap;

    const NA: f64 = f64::NAN;

    /// Sort-based median/MAD written independently of the module helpers.
    fn oracle_bounds(values: &[f64], k: f64) -> (f64, f64) {
        fn med(mut v: Vec<f64>) -> f64 {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = v.len();
            if n % 2 == 1 {
                v[(n - 1) / 2]
            } else {
                (v[n / 2 - 1] + v[n / 2]) / 2.0
            }
        }
        let m = med(values.to_vec());
        let d = med(values.iter().map(|x| (x - m).abs()).collect());
        (m - k * d, m + k * d)
    }

    fn cal(n: usize) -> Vec<Day> {
        weekday_calendar(NaiveDate::from_ymd_opt(2020, 1, 6).unwrap(), n)
    }

    fn series(id: &str, close: Vec<f64>, volume: Vec<f64>) -> PriceSeries {
        PriceSeries {
            asset_id: id.into(),
            dates: cal(close.len()),
            close,
            volume,
        }
    }

    fn panel(close: Vec<f64>, volume: Vec<f64>, pe: Vec<f64>, pb: Vec<f64>) -> MarketPanel {
        let n = close.len();
        let flat = || series("MARKET", vec![100.0; n], vec![0.0; n]);
        let mut industry_index = BTreeMap::new();
        industry_index.insert("TECH".to_string(), series("INDUSTRY:TECH", vec![50.0; n], vec![0.0; n]));
        MarketPanel {
            calendar: cal(n),
            assets: vec![AssetRecord {
                prices: series("A", close, volume),
                industry: "TECH".into(),
                fundamentals: Some(Fundamentals { pe, pb }),
            }],
            market_index: flat(),
            industry_index,
        }
    }

    #[test]
    fn interior_gap_is_linear_midpoint() {
        let mut v = vec![1.0, NA, 3.0];
        fill_gaps(&mut v);
        assert_eq!(v, vec![1.0, 2.0, 3.0]);

        let mut w = vec![0.0, NA, NA, 3.0, NA];
        fill_gaps(&mut w);
        assert_eq!(w, vec![0.0, 1.0, 2.0, 3.0, 3.0]);
    }

    #[test]
    fn clean_column_is_unchanged() {
        let mut v = vec![1.0, 2.0, 1.5, 2.5, 1.8];
        let before = v.clone();
        assert_eq!(winsorize_mad(&mut v, 5.0), 0);
        assert_eq!(v, before);
    }

    #[test]
    fn spike_clipped_to_oracle_boundary() {
        let mut v = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 100.0];
        let (_, hi) = oracle_bounds(&v, 5.0);
        assert_eq!(winsorize_mad(&mut v, 5.0), 1);
        assert_eq!(v[9], hi);
        assert_eq!(hi, 0.0);

        let mut w = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 100.0];
        let (lo, hi) = oracle_bounds(&w, 5.0);
        winsorize_mad(&mut w, 5.0);
        assert_eq!(w[9], hi);
        assert!(w.iter().all(|x| *x >= lo && *x <= hi));
    }

    #[test]
    fn clean_interpolates_and_drops_leading_rows() {
        let p = panel(
            vec![NA, 10.0, 11.0, NA, 13.0, 14.0],
            vec![50.0, 50.0, 60.0, 70.0, 55.0, NA],
            vec![10.0, 10.0, NA, 12.0, 11.0, 13.0],
            vec![1.0, 1.0, 1.1, 1.2, 1.1, 1.0],
        );
        let c = clean(&p, &CleanPolicy::default()).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.calendar, p.calendar[1..].to_vec());
        let a = &c.assets[0];
        assert_eq!(a.prices.close, vec![10.0, 11.0, 12.0, 13.0, 14.0]);
        assert_eq!(a.prices.volume, vec![50.0, 60.0, 70.0, 55.0, 55.0]);
        let f = a.fundamentals.as_ref().unwrap();
        assert_eq!(f.pe, vec![10.0, 11.0, 12.0, 11.0, 13.0]);
        c.validate().unwrap();
    }

    #[test]
    fn all_missing_column_is_an_error() {
        let p = panel(vec![1.0, 2.0], vec![1.0, 1.0], vec![NA, NA], vec![1.0, 1.0]);
        assert!(matches!(clean(&p, &CleanPolicy::default()), Err(Error::AllMissingColumn(name)) if name == "A:pe_ratio"));
    }

    #[test]
    fn price_spike_clipped_in_return_space_keeps_trend() {
        // Steady 1% growth with one bad print.
        let mut close: Vec<f64> = (0..40).map(|t| 100.0 * 1.01f64.powi(t)).collect();
        close[20] *= 3.0;
        let mut c = close.clone();
        assert!(winsorize_price_returns(&mut c, 5.0) > 0);
        assert!(c[39] > 100.0 * 1.01f64.powi(30));
        let mut trend: Vec<f64> = (0..40).map(|t| 100.0 * 1.02f64.powi(t)).collect();
        let before = trend.clone();
        assert_eq!(winsorize_price_returns(&mut trend, 5.0), 0);
        assert_eq!(trend, before);
    }

    #[test]
    fn clean_is_idempotent() {
        let mut close: Vec<f64> = (0..60).map(|t| 50.0 + (t as f64 * 0.7).sin() * 3.0 + t as f64 * 0.2).collect();
        close[7] = NA;
        close[30] = 400.0;
        let mut volume: Vec<f64> = (0..60).map(|t| 1000.0 + (t * 37 % 11) as f64 * 10.0).collect();
        volume[12] = 1e7;
        volume[59] = NA;
        let pe: Vec<f64> = (0..60).map(|t| 12.0 + (t % 5) as f64).collect();
        let mut pb: Vec<f64> = (0..60).map(|t| 1.5 + (t % 3) as f64 * 0.1).collect();
        pb[0] = NA;
        let p = panel(close, volume, pe, pb);
        let once = clean(&p, &CleanPolicy::default()).unwrap();
        let twice = clean(&once, &CleanPolicy::default()).unwrap();
        assert_eq!(once, twice);
        let bits = |s: &PriceSeries| s.close.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&once.assets[0].prices), bits(&twice.assets[0].prices));
    }

    #[test]
    fn rejects_non_positive_threshold() {
        let p = panel(vec![1.0, 2.0], vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]);
        assert!(clean(&p, &CleanPolicy { mad_threshold: 0.0 }).is_err());
    }
}
