//! Seeded regime-switching market generator with a planted factor signal.
//!
//! The market index follows a log random walk whose drift and volatility
//! switch according to a repeating regime schedule. Each industry index
//! adds its own shock to the market move. Per-asset P/E, P/B and log-volume
//! are stationary AR(1) processes around fixed centres. The next-day asset
//! log return is
//!
//! ```text
//! r[t+1] = alpha + Σ beta_f · s_f[t] + nonlinear · (s_pe[t]² − 1) + market · m[t+1] + noise · e
//! ```
//!
//! where `s_f = (F_f − centre_f) / scale_f` is the signal scaling of raw
//! factor `F_f` (see [`SIGNAL_CENTER`], [`SIGNAL_SCALE`]) and `m` is the
//! market log return. Only the first two terms are linear in the factors.

use std::fmt;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::calendar::weekday_calendar;
use super::factor_panel::{FactorPanel, FACTOR_NAMES};
use super::series::{AssetRecord, Fundamentals, MarketPanel, PriceSeries};

/// Centre of each raw factor, in [`FACTOR_NAMES`] order.
pub const SIGNAL_CENTER: [f64; 5] = [0.0, 0.0, 15.0, 2.0, 12.0];
/// Scale of each raw factor, in [`FACTOR_NAMES`] order.
pub const SIGNAL_SCALE: [f64; 5] = [0.01, 0.01, 3.0, 0.5, 0.5];

const FACTOR_PERSISTENCE: f64 = 0.95;
const INDEX_START: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Bull,
    Bear,
    Shock,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Bull, Regime::Bear, Regime::Shock];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Bull => "bull",
            Regime::Bear => "bear",
            Regime::Shock => "shock",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One segment of the regime schedule. Drift and vol are daily log-return units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeSpec {
    pub kind: Regime,
    pub length: usize,
    pub drift: f64,
    pub vol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Loadings {
    #[serde(default)]
    pub alpha: f64,
    /// Loadings on the signal-scaled factors, in [`FACTOR_NAMES`] order.
    /// Shorter vectors are zero-padded.
    #[serde(default)]
    pub betas: Vec<f64>,
    #[serde(default)]
    pub nonlinear: f64,
    /// Exposure to the same-day market return.
    #[serde(default)]
    pub market: f64,
}

/// Keys missing from JSON take their default values, except `seed`,
/// which stays unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub assets: usize,
    pub days: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub regimes: Vec<RegimeSpec>,
    pub loadings: Loadings,
    pub noise: f64,
    #[serde(default = "default_industries")]
    pub industries: usize,
}

fn default_industries() -> usize {
    2
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            assets: 20,
            days: 1300,
            seed: Some(42),
            regimes: vec![
                RegimeSpec {
                    kind: Regime::Bull,
                    length: 250,
                    drift: 0.0008,
                    vol: 0.010,
                },
                RegimeSpec {
                    kind: Regime::Bear,
                    length: 150,
                    drift: -0.0012,
                    vol: 0.016,
                },
                RegimeSpec {
                    kind: Regime::Shock,
                    length: 200,
                    drift: 0.0,
                    vol: 0.012,
                },
            ],
            loadings: Loadings {
                alpha: 0.0,
                betas: vec![0.0, 0.0, 0.0015, -0.001, 0.0005],
                nonlinear: 0.003,
                market: 1.0,
            },
            noise: 0.012,
            industries: default_industries(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.assets == 0 {
            return bad("assets must be positive".into());
        }
        if self.days < 2 {
            return bad("days must be at least 2".into());
        }
        if self.industries == 0 {
            return bad("industries must be positive".into());
        }
        if self.regimes.is_empty() {
            return bad("regime schedule is empty".into());
        }
        for (i, r) in self.regimes.iter().enumerate() {
            if r.length == 0 {
                return bad(format!("regime {i} has zero length"));
            }
            if !(r.vol > 0.0) || !r.vol.is_finite() || !r.drift.is_finite() {
                return bad(format!("regime {i} needs a positive volatility and finite drift"));
            }
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return bad("noise must be non-negative".into());
        }
        if self.loadings.betas.len() > FACTOR_NAMES.len() {
            return bad(format!("at most {} betas", FACTOR_NAMES.len()));
        }
        Ok(())
    }

    /// Regime in force on each generated day, cycling through the schedule.
    pub fn regime_schedule(&self) -> Vec<Regime> {
        self.regimes
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.kind, r.length))
            .cycle()
            .take(self.days)
            .collect()
    }

    fn beta(&self, f: usize) -> f64 {
        self.loadings.betas.get(f).copied().unwrap_or(0.0)
    }
}

/// Generator output: the panel plus the ground truth it was built from.
#[derive(Debug, Clone)]
pub struct SyntheticMarket {
    pub panel: MarketPanel,
    /// Raw factor values as planted, on the return calendar.
    pub planted_factors: FactorPanel,
    /// Regime of every panel day.
    pub regimes: Vec<Regime>,
}

/// Signal-scaled value of raw factor `f`.
pub fn signal(f: usize, raw: f64) -> f64 {
    (raw - SIGNAL_CENTER[f]) / SIGNAL_SCALE[f]
}

/// Deterministic function of `(cfg, seed)`.
pub fn synth_generate(cfg: &SynthConfig, seed: u64) -> Result<SyntheticMarket> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };

    let days = cfg.days;
    let n_assets = cfg.assets;
    let n_ind = cfg.industries.min(n_assets);
    // contiguous blocks so that ids sort in generation order
    let industry_of = |a: usize| a * n_ind / n_assets;
    let calendar = weekday_calendar(NaiveDate::from_ymd_opt(2010, 1, 4).expect("valid date"), days);
    let schedule: Vec<&RegimeSpec> = cfg
        .regimes
        .iter()
        .flat_map(|r| std::iter::repeat_n(r, r.length))
        .cycle()
        .take(days)
        .collect();
    let regimes = schedule.iter().map(|s| s.kind).collect();

    // Market and industry log returns; day 0 carries no return.
    let mut market = vec![0.0; days];
    let mut industry = vec![vec![0.0; days]; n_ind];
    for t in 1..days {
        let s = schedule[t];
        market[t] = s.drift + s.vol * normal();
        for ind in industry.iter_mut() {
            ind[t] = market[t] + s.vol * normal();
        }
    }

    // Latent standardized AR(1) states for pe, pb, log volume.
    let innov = (1.0 - FACTOR_PERSISTENCE * FACTOR_PERSISTENCE).sqrt();
    let mut latent = vec![[0.0f64; 3]; n_assets];
    for l in latent.iter_mut() {
        for x in l.iter_mut() {
            *x = normal();
        }
    }
    let asset_start: Vec<f64> = (0..n_assets).map(|_| (3.0 + 0.5 * normal()).exp() * 2.0).collect();

    let mut raw = vec![vec![[0.0f64; 5]; n_assets]; days];
    let mut log_close = vec![vec![0.0f64; days]; n_assets];
    for a in 0..n_assets {
        log_close[a][0] = asset_start[a].ln();
    }
    for t in 0..days {
        if t > 0 {
            for l in latent.iter_mut() {
                for x in l.iter_mut() {
                    *x = FACTOR_PERSISTENCE * *x + innov * normal();
                }
            }
        }
        for a in 0..n_assets {
            let l = latent[a];
            raw[t][a] = [
                market[t],
                industry[industry_of(a)][t],
                SIGNAL_CENTER[2] + SIGNAL_SCALE[2] * l[0],
                SIGNAL_CENTER[3] + SIGNAL_SCALE[3] * l[1],
                SIGNAL_CENTER[4] + SIGNAL_SCALE[4] * l[2],
            ];
        }
        if t + 1 < days {
            for a in 0..n_assets {
                let f = &raw[t][a];
                let mut r = cfg.loadings.alpha;
                for (k, v) in f.iter().enumerate() {
                    r += cfg.beta(k) * signal(k, *v);
                }
                let s_pe = signal(2, f[2]);
                r += cfg.loadings.nonlinear * (s_pe * s_pe - 1.0);
                r += cfg.loadings.market * market[t + 1];
                r += cfg.noise * normal();
                log_close[a][t + 1] = log_close[a][t] + r;
            }
        }
    }

    let index_series = |id: String, rets: &[f64]| {
        let mut lp = INDEX_START.ln();
        let close = rets
            .iter()
            .map(|r| {
                lp += r;
                lp.exp()
            })
            .collect();
        PriceSeries {
            asset_id: id,
            dates: calendar.clone(),
            close,
            volume: vec![0.0; days],
        }
    };

    let industry_names: Vec<String> = (0..n_ind).map(|j| format!("S{j}")).collect();
    let assets = (0..n_assets)
        .map(|a| {
            let volume = (0..days).map(|t| raw[t][a][4].exp_m1()).collect();
            AssetRecord {
                prices: PriceSeries {
                    asset_id: format!("{}.A{a:03}", industry_names[industry_of(a)]),
                    dates: calendar.clone(),
                    close: log_close[a].iter().map(|x| x.exp()).collect(),
                    volume,
                },
                industry: industry_names[industry_of(a)].clone(),
                fundamentals: Some(Fundamentals {
                    pe: (0..days).map(|t| raw[t][a][2]).collect(),
                    pb: (0..days).map(|t| raw[t][a][3]).collect(),
                }),
            }
        })
        .collect::<Vec<_>>();

    let panel = MarketPanel {
        market_index: index_series("MARKET".into(), &market),
        industry_index: industry_names
            .iter()
            .zip(&industry)
            .map(|(name, rets)| (name.clone(), index_series(format!("INDUSTRY:{name}"), rets)))
            .collect(),
        assets,
        calendar: calendar.clone(),
    };
    panel.validate()?;

    let mut planted = Vec::with_capacity((days - 1) * n_assets * 5);
    for row in raw.iter().skip(1) {
        for f in row {
            planted.extend_from_slice(f);
        }
    }
    let planted_factors = FactorPanel::new(
        FACTOR_NAMES.iter().map(|s| s.to_string()).collect(),
        panel.asset_ids(),
        calendar[1..].to_vec(),
        planted,
    )?;

    Ok(SyntheticMarket {
        panel,
        planted_factors,
        regimes,
    })
}
