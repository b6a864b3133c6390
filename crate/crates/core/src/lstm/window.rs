use std::ops::Range;

use crate::error::{Error, Result};
use crate::marketdata::{FactorPanel, ReturnPanel};

/// One training example: `window` consecutive factor rows for a single
/// asset and the asset's return on the following day.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Row-major `window × n_factors`.
    pub inputs: Vec<f64>,
    pub target: f64,
    pub asset: usize,
    /// Last input day (panel index).
    pub end_day: usize,
    /// `end_day + 1`.
    pub target_day: usize,
}

fn check_aligned(panel: &FactorPanel, returns: &ReturnPanel) -> Result<()> {
    if panel.calendar != returns.calendar || panel.asset_ids != returns.asset_ids {
        return Err(Error::InvalidParameter(
            "factor panel and returns must share calendar and assets".into(),
        ));
    }
    Ok(())
}

/// Every stride-1 window over the full panel, day-major then asset order.
pub fn make_windows(panel: &FactorPanel, returns: &ReturnPanel, window: usize) -> Result<Vec<Sample>> {
    check_aligned(panel, returns)?;
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let n = panel.n_days();
    if n <= window {
        return Err(Error::TooShort {
            needed: window + 1,
            actual: n,
        });
    }
    make_windows_ending(panel, returns, window, window - 1..n - 1)
}

/// Windows whose last input day lies in `end_days`. Days lacking a full
/// history or a following target day are skipped.
pub fn make_windows_ending(
    panel: &FactorPanel,
    returns: &ReturnPanel,
    window: usize,
    end_days: Range<usize>,
) -> Result<Vec<Sample>> {
    check_aligned(panel, returns)?;
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let first = end_days.start.max(window - 1);
    let last = end_days.end.min(panel.n_days().saturating_sub(1));
    let mut out = Vec::new();
    for d in first..last {
        for a in 0..panel.n_assets() {
            out.push(Sample {
                inputs: window_inputs(panel, a, d, window),
                target: returns.get(d + 1, a),
                asset: a,
                end_day: d,
                target_day: d + 1,
            });
        }
    }
    Ok(out)
}

/// Input matrix for `asset` ending at `end_day`; the caller ensures
/// `end_day + 1 >= window`.
pub fn window_inputs(panel: &FactorPanel, asset: usize, end_day: usize, window: usize) -> Vec<f64> {
    let mut inputs = Vec::with_capacity(window * panel.n_factors());
    for d in end_day + 1 - window..=end_day {
        inputs.extend_from_slice(panel.row(d, asset));
    }
    inputs
}
