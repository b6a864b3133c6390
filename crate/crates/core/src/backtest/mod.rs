//! Walk-forward backtests, regime labels, risk-scaled portfolios and the
//! comparison and sweep reports built on them.

mod config;
mod engine;
mod persist;
mod portfolio;
mod regime;
mod report;
mod sweep;

pub use config::{BacktestConfig, ModelKind};
pub use engine::{fold_plan, walk_forward, BacktestResult, Fold, FoldSummary, RegimeReport};
pub use persist::write_run_dir;
pub use portfolio::{apply_risk_constraints, construct_portfolio, risk_scale};
pub use regime::classify_regimes;
pub use report::{
    compare_models, format_overall_row, format_percent, format_regime_row, format_signed, overall_cells, regime_cells,
    ComparisonTable, RegimeRow,
};
pub use sweep::{optimization_sweep, rung_config, write_sweep, SweepRow, LADDER, SWEEP_HEADER};
