use std::ops::Range;

use crate::error::{Error, Result};
use crate::marketdata::{FactorPanel, ReturnPanel};

use super::ols::{least_squares, QrSolve};

/// `R = alpha + Σ beta_i F_i + ε`, fitted by least squares.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub alpha: f64,
    pub betas: Vec<f64>,
    /// In-sample residuals, in the order the observations were supplied.
    pub residuals: Vec<f64>,
    pub factor_names: Vec<String>,
}

/// Fits the model on explicit observations: `rows[t]` is the factor vector
/// paired with target `y[t]`.
pub fn fit_ols_rows(factor_names: &[String], rows: &[&[f64]], y: &[f64]) -> Result<LinearModel> {
    let k = factor_names.len();
    if rows.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: rows.len(),
            actual: y.len(),
        });
    }
    if y.len() <= k + 1 {
        return Err(Error::TooFewObservations {
            needed: k + 2,
            actual: y.len(),
        });
    }
    if let Some(r) = rows.iter().find(|r| r.len() != k) {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: r.len(),
        });
    }
    let mut cols = vec![vec![1.0; y.len()]];
    for j in 0..k {
        cols.push(rows.iter().map(|r| r[j]).collect());
    }
    if cols.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let coef = match least_squares(&cols, y) {
        QrSolve::Solved(b) => b,
        QrSolve::RankDeficient(idx) => {
            let names = idx
                .into_iter()
                .map(|i| if i == 0 { "intercept".to_string() } else { factor_names[i - 1].clone() })
                .collect();
            return Err(Error::RankDeficient(names));
        }
    };
    let alpha = coef[0];
    let betas = coef[1..].to_vec();
    let residuals = rows
        .iter()
        .zip(y)
        .map(|(r, yt)| yt - (alpha + dot(&betas, r)))
        .collect();
    Ok(LinearModel {
        alpha,
        betas,
        residuals,
        factor_names: factor_names.to_vec(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pools every asset over factor days `fit_range`, pairing the factors of
/// day `d` with the return realized on day `d + 1`.
pub fn fit_ols(panel: &FactorPanel, returns: &ReturnPanel, fit_range: Range<usize>) -> Result<LinearModel> {
    if returns.n_assets() != panel.n_assets() {
        return Err(Error::LengthMismatch {
            expected: panel.n_assets(),
            actual: returns.n_assets(),
        });
    }
    if fit_range.end >= returns.n_days() || fit_range.end > panel.n_days() {
        return Err(Error::InvalidParameter(format!(
            "fit range {fit_range:?} needs a following return day"
        )));
    }
    let mut rows = Vec::with_capacity(fit_range.len() * panel.n_assets());
    let mut y = Vec::with_capacity(rows.capacity());
    for d in fit_range {
        for a in 0..panel.n_assets() {
            rows.push(panel.row(d, a));
            y.push(returns.get(d + 1, a));
        }
    }
    fit_ols_rows(&panel.factor_names, &rows, &y)
}

/// `alpha + Σ beta_i F_i`.
pub fn predict_linear(model: &LinearModel, factors: &[f64]) -> Result<f64> {
    if factors.len() != model.betas.len() {
        return Err(Error::LengthMismatch {
            expected: model.betas.len(),
            actual: factors.len(),
        });
    }
    Ok(model.alpha + dot(&model.betas, factors))
}
