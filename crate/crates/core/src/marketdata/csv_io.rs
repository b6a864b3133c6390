//! Prices and index CSV files.
//!
//! ```text
//! date,asset_id,close,volume,pe_ratio,pb_ratio
//! date,index_id,close            (index_id: MARKET | INDUSTRY:<name>)
//! ```
//!
//! Missing values are empty fields. Assets are ordered by id.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

use super::calendar::Day;
use super::series::{AssetRecord, Fundamentals, MarketPanel, PriceSeries};

pub const PRICES_HEADER: [&str; 6] = ["date", "asset_id", "close", "volume", "pe_ratio", "pb_ratio"];
pub const INDEX_HEADER: [&str; 3] = ["date", "index_id", "close"];
pub const MARKET_ID: &str = "MARKET";
pub const INDUSTRY_PREFIX: &str = "INDUSTRY:";

#[derive(Debug, Deserialize)]
struct PriceRow {
    date: String,
    asset_id: String,
    close: Option<f64>,
    volume: Option<f64>,
    pe_ratio: Option<f64>,
    pb_ratio: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct IndexRow {
    date: String,
    index_id: String,
    close: Option<f64>,
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let h = rdr.headers()?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(Error::Malformed(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            h.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

#[derive(Default)]
struct RawSeries {
    close: BTreeMap<Day, f64>,
    volume: BTreeMap<Day, f64>,
    pe: BTreeMap<Day, f64>,
    pb: BTreeMap<Day, f64>,
}

fn put(map: &mut BTreeMap<Day, f64>, day: Day, v: Option<f64>) {
    if let Some(v) = v {
        map.insert(day, v);
    }
}

/// Parses both files into a gappy panel aligned to the union of their dates.
///
/// Asset industries come from `industry_map`; failing that, from an id of the
/// form `<industry>.<ticker>`; failing that, from the only industry index.
pub fn read_panel<P: Read, I: Read>(prices: P, index: I, industry_map: &BTreeMap<String, String>) -> Result<MarketPanel> {
    let mut assets: BTreeMap<String, RawSeries> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut days = BTreeSet::new();

    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(prices);
    check_header(&mut rdr, &PRICES_HEADER)?;
    for row in rdr.deserialize() {
        let row: PriceRow = row?;
        let day = Day::parse(&row.date)?;
        if !seen.insert((row.asset_id.clone(), day)) {
            return Err(Error::Malformed(format!("duplicate row for `{}` on {day}", row.asset_id)));
        }
        days.insert(day);
        let s = assets.entry(row.asset_id.clone()).or_default();
        put(&mut s.close, day, row.close);
        put(&mut s.volume, day, row.volume);
        put(&mut s.pe, day, row.pe_ratio);
        put(&mut s.pb, day, row.pb_ratio);
    }

    let mut indices: BTreeMap<String, BTreeMap<Day, f64>> = BTreeMap::new();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(index);
    check_header(&mut rdr, &INDEX_HEADER)?;
    for row in rdr.deserialize() {
        let row: IndexRow = row?;
        if row.index_id != MARKET_ID && !row.index_id.starts_with(INDUSTRY_PREFIX) {
            return Err(Error::Malformed(format!("unknown index id `{}`", row.index_id)));
        }
        let day = Day::parse(&row.date)?;
        if !seen.insert((row.index_id.clone(), day)) {
            return Err(Error::Malformed(format!("duplicate row for `{}` on {day}", row.index_id)));
        }
        days.insert(day);
        let s = indices.entry(row.index_id).or_default();
        if let Some(c) = row.close {
            s.insert(day, c);
        }
    }

    if assets.is_empty() {
        return Err(Error::Malformed("prices file has no rows".into()));
    }
    let calendar: Vec<Day> = days.into_iter().collect();
    let align = |m: &BTreeMap<Day, f64>| -> Vec<f64> { calendar.iter().map(|d| m.get(d).copied().unwrap_or(f64::NAN)).collect() };
    let index_series = |id: &str, m: &BTreeMap<Day, f64>| PriceSeries {
        asset_id: id.to_string(),
        dates: calendar.clone(),
        close: align(m),
        volume: vec![0.0; calendar.len()],
    };

    let market = indices
        .get(MARKET_ID)
        .ok_or_else(|| Error::Malformed("index file has no MARKET rows".into()))?;
    let market_index = index_series(MARKET_ID, market);
    let industry_index: BTreeMap<String, PriceSeries> = indices
        .iter()
        .filter_map(|(id, m)| id.strip_prefix(INDUSTRY_PREFIX).map(|name| (name.to_string(), index_series(id, m))))
        .collect();

    let resolve = |asset: &str| -> Result<String> {
        if let Some(ind) = industry_map.get(asset) {
            return Ok(ind.clone());
        }
        if let Some((prefix, _)) = asset.split_once('.') {
            if industry_index.contains_key(prefix) {
                return Ok(prefix.to_string());
            }
        }
        if industry_index.len() == 1 {
            return Ok(industry_index.keys().next().cloned().unwrap_or_default());
        }
        Err(Error::Malformed(format!("cannot resolve the industry of `{asset}`")))
    };

    let assets = assets
        .iter()
        .map(|(id, s)| {
            Ok(AssetRecord {
                prices: PriceSeries {
                    asset_id: id.clone(),
                    dates: calendar.clone(),
                    close: align(&s.close),
                    volume: align(&s.volume),
                },
                industry: resolve(id)?,
                fundamentals: Some(Fundamentals {
                    pe: align(&s.pe),
                    pb: align(&s.pb),
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MarketPanel {
        calendar,
        assets,
        market_index,
        industry_index,
    })
}

pub fn load_panel(prices: &Path, index: &Path, industry_map: &BTreeMap<String, String>) -> Result<MarketPanel> {
    read_panel(std::fs::File::open(prices)?, std::fs::File::open(index)?, industry_map)
}

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

/// One row per asset-day, day-major.
pub fn write_prices<W: Write>(panel: &MarketPanel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PRICES_HEADER)?;
    for (t, day) in panel.calendar.iter().enumerate() {
        let date = day.to_string();
        for a in &panel.assets {
            let (pe, pb) = match &a.fundamentals {
                Some(f) => (fmt_value(f.pe[t]), fmt_value(f.pb[t])),
                None => (String::new(), String::new()),
            };
            w.write_record([
                date.as_str(),
                a.id(),
                &fmt_value(a.prices.close[t]),
                &fmt_value(a.prices.volume[t]),
                &pe,
                &pb,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_index<W: Write>(panel: &MarketPanel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(INDEX_HEADER)?;
    for (t, day) in panel.calendar.iter().enumerate() {
        let date = day.to_string();
        w.write_record([date.as_str(), MARKET_ID, &fmt_value(panel.market_index.close[t])])?;
        for (name, s) in &panel.industry_index {
            let id = format!("{INDUSTRY_PREFIX}{name}");
            w.write_record([date.as_str(), &id, &fmt_value(s.close[t])])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marketdata::synth::{synth_generate, SynthConfig};

    const PRICES: &str = "\
date,asset_id,close,volume,pe_ratio,pb_ratio
2020-01-02,B,20,100,8,1.1
2020-01-02,A,10,50,12,2
2020-01-03,A,,60,12,2
2020-01-03,B,21,90,8,1.2
2020-01-06,A,11,55,,2
2020-01-06,B,22,95,9,1.2
";
    const INDEX: &str = "\
date,index_id,close
2020-01-02,MARKET,100
2020-01-03,MARKET,101
2020-01-06,MARKET,102
2020-01-02,INDUSTRY:TECH,50
2020-01-03,INDUSTRY:TECH,50.5
2020-01-06,INDUSTRY:TECH,51
";

    #[test]
    fn parses_gappy_files() {
        let p = read_panel(PRICES.as_bytes(), INDEX.as_bytes(), &BTreeMap::new()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.asset_ids(), ["A", "B"]);
        let a = &p.assets[0];
        assert_eq!(a.industry, "TECH");
        assert!(a.prices.close[1].is_nan());
        assert!(a.fundamentals.as_ref().unwrap().pe[2].is_nan());
        assert_eq!(p.industry_index["TECH"].close, vec![50.0, 50.5, 51.0]);
    }

    #[test]
    fn rejects_bad_header_and_duplicates() {
        let bad = PRICES.replacen("pe_ratio", "pe", 1);
        assert!(read_panel(bad.as_bytes(), INDEX.as_bytes(), &BTreeMap::new()).is_err());
        let dup = format!("{PRICES}2020-01-06,B,22,95,9,1.2\n");
        assert!(matches!(
            read_panel(dup.as_bytes(), INDEX.as_bytes(), &BTreeMap::new()),
            Err(Error::Malformed(_))
        ));
        let no_market = INDEX.replace("MARKET", "INDUSTRY:X");
        assert!(read_panel(PRICES.as_bytes(), no_market.as_bytes(), &BTreeMap::new()).is_err());
    }

    #[test]
    fn industry_needs_resolution_when_ambiguous() {
        let two = format!("{INDEX}2020-01-02,INDUSTRY:FIN,10\n");
        assert!(read_panel(PRICES.as_bytes(), two.as_bytes(), &BTreeMap::new()).is_err());
        let map: BTreeMap<String, String> = [("A", "TECH"), ("B", "FIN")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let p = read_panel(PRICES.as_bytes(), two.as_bytes(), &map).unwrap();
        assert_eq!(p.assets[1].industry, "FIN");
    }

    #[test]
    fn write_then_read_reproduces_synthetic_panel() {
        let cfg = SynthConfig {
            assets: 3,
            days: 30,
            ..SynthConfig::default()
        };
        let m = synth_generate(&cfg, 3).unwrap();
        let mut prices = Vec::new();
        let mut index = Vec::new();
        write_prices(&m.panel, &mut prices).unwrap();
        write_index(&m.panel, &mut index).unwrap();
        let text = String::from_utf8(prices.clone()).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 30);
        let back = read_panel(prices.as_slice(), index.as_slice(), &BTreeMap::new()).unwrap();
        assert_eq!(back, m.panel);
    }
}
