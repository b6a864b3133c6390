use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::calendar::Day;

/// Daily closes and volumes for one asset or index. Missing observations
/// are `NaN` until the panel has been cleaned.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub asset_id: String,
    pub dates: Vec<Day>,
    pub close: Vec<f64>,
    pub volume: Vec<f64>,
}

impl PriceSeries {
    /// Builds a fully observed series, checking every invariant.
    pub fn new(asset_id: impl Into<String>, dates: Vec<Day>, close: Vec<f64>, volume: Vec<f64>) -> Result<Self> {
        let s = PriceSeries {
            asset_id: asset_id.into(),
            dates,
            close,
            volume,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.close.len()
    }

    pub fn is_empty(&self) -> bool {
        self.close.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dates.len() != self.close.len() || self.volume.len() != self.close.len() {
            return Err(Error::Malformed(format!(
                "series `{}` has {} dates, {} closes, {} volumes",
                self.asset_id,
                self.dates.len(),
                self.close.len(),
                self.volume.len()
            )));
        }
        if self.dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Malformed(format!(
                "series `{}` dates are not strictly increasing",
                self.asset_id
            )));
        }
        if let Some((index, &value)) = self.close.iter().enumerate().find(|(_, c)| !(**c > 0.0)) {
            return Err(Error::NonPositivePrice {
                asset: self.asset_id.clone(),
                index,
                value,
            });
        }
        if self.volume.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Malformed(format!(
                "series `{}` has a negative or missing volume",
                self.asset_id
            )));
        }
        Ok(())
    }
}

/// Daily log returns; `dates[t]` is the day the return was realized.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub asset_id: String,
    pub dates: Vec<Day>,
    pub returns: Vec<f64>,
}

/// `returns[t] = ln(close[t+1] / close[t])`.
pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.close.len() < 2 {
        return Err(Error::EmptySeries(prices.asset_id.clone()));
    }
    if let Some((index, &value)) = prices.close.iter().enumerate().find(|(_, c)| !(**c > 0.0)) {
        return Err(Error::NonPositivePrice {
            asset: prices.asset_id.clone(),
            index,
            value,
        });
    }
    let returns = prices.close.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let dates = if prices.dates.len() == prices.close.len() {
        prices.dates[1..].to_vec()
    } else {
        Vec::new()
    };
    Ok(ReturnSeries {
        asset_id: prices.asset_id.clone(),
        dates,
        returns,
    })
}

/// Per-day P/E and P/B ratios for one asset.
#[derive(Debug, Clone, PartialEq)]
pub struct Fundamentals {
    pub pe: Vec<f64>,
    pub pb: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssetRecord {
    pub prices: PriceSeries,
    pub industry: String,
    pub fundamentals: Option<Fundamentals>,
}

impl AssetRecord {
    pub fn id(&self) -> &str {
        &self.prices.asset_id
    }
}

/// A universe of assets and indices on a shared trading-day axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPanel {
    pub calendar: Vec<Day>,
    pub assets: Vec<AssetRecord>,
    pub market_index: PriceSeries,
    /// Keyed by industry name.
    pub industry_index: BTreeMap<String, PriceSeries>,
}

impl MarketPanel {
    pub fn len(&self) -> usize {
        self.calendar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calendar.is_empty()
    }

    pub fn asset_ids(&self) -> Vec<String> {
        self.assets.iter().map(|a| a.id().to_string()).collect()
    }

    /// Checks alignment and the post-clean "no missing values" invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.calendar.len();
        let check = |s: &PriceSeries| -> Result<()> {
            if s.dates != self.calendar {
                return Err(Error::Malformed(format!(
                    "series `{}` is not aligned to the panel calendar",
                    s.asset_id
                )));
            }
            s.validate()
        };
        for a in &self.assets {
            check(&a.prices)?;
            if let Some(f) = &a.fundamentals {
                if f.pe.len() != n || f.pb.len() != n {
                    return Err(Error::Malformed(format!("fundamentals of `{}` misaligned", a.id())));
                }
                if f.pe.iter().chain(&f.pb).any(|v| !v.is_finite()) {
                    return Err(Error::Malformed(format!("fundamentals of `{}` have gaps", a.id())));
                }
            }
        }
        check(&self.market_index)?;
        self.industry_index.values().try_for_each(check)
    }

    /// Keeps only the first `days` rows.
    pub fn truncated(&self, days: usize) -> MarketPanel {
        let days = days.min(self.len());
        let cut = |s: &PriceSeries| PriceSeries {
            asset_id: s.asset_id.clone(),
            dates: s.dates[..days].to_vec(),
            close: s.close[..days].to_vec(),
            volume: s.volume[..days].to_vec(),
        };
        MarketPanel {
            calendar: self.calendar[..days].to_vec(),
            assets: self
                .assets
                .iter()
                .map(|a| AssetRecord {
                    prices: cut(&a.prices),
                    industry: a.industry.clone(),
                    fundamentals: a.fundamentals.as_ref().map(|f| Fundamentals {
                        pe: f.pe[..days].to_vec(),
                        pb: f.pb[..days].to_vec(),
                    }),
                })
                .collect(),
            market_index: cut(&self.market_index),
            industry_index: self.industry_index.iter().map(|(k, v)| (k.clone(), cut(v))).collect(),
        }
    }
}
