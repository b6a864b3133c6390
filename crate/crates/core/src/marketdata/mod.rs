//! Market data: loading, cleaning, synthesis, log returns and factors.

mod calendar;
mod clean;
mod csv_io;
mod factor_panel;
mod series;
mod synth;

pub use calendar::{weekday_calendar, Day};
pub use clean::{clean, fill_gaps, mad, mad_bounds, median, winsorize_mad, winsorize_price_returns, CleanPolicy};
pub use csv_io::{load_panel, read_panel, write_index, write_prices, INDEX_HEADER, PRICES_HEADER};
pub use factor_panel::{
    asset_returns, compute_factors, standardize, varying_factors, FactorPanel, ReturnPanel, Standardizer, FACTOR_NAMES, INDUSTRY_RETURN,
    LOG_VOLUME, MARKET_RETURN, MIN_FACTOR_STD, PB_RATIO, PE_RATIO,
};
pub use series::{log_returns, AssetRecord, Fundamentals, MarketPanel, PriceSeries, ReturnSeries};
pub use synth::{signal, synth_generate, Loadings, Regime, RegimeSpec, SynthConfig, SyntheticMarket, SIGNAL_CENTER, SIGNAL_SCALE};
