use crate::error::{Error, Result};
use crate::marketdata::Regime;

/// Labels day `t` from the cumulative index log return over the
/// `lookback` days before it, `t − lookback ..= t − 1`. Earlier days are
/// unlabeled.
pub fn classify_regimes(index_returns: &[f64], lookback: usize, threshold: f64) -> Result<Vec<Option<Regime>>> {
    if index_returns.len() <= lookback {
        return Err(Error::TooShort {
            needed: lookback + 1,
            actual: index_returns.len(),
        });
    }
    let mut labels = vec![None; index_returns.len()];
    for (t, label) in labels.iter_mut().enumerate().skip(lookback) {
        let trailing: f64 = index_returns[t - lookback..t].iter().sum();
        *label = Some(if trailing >= threshold {
            Regime::Bull
        } else if trailing <= -threshold {
            Regime::Bear
        } else {
            Regime::Shock
        });
    }
    Ok(labels)
}
