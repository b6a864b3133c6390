use std::io::Write;

use crate::error::{Error, Result};

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::TooFewObservations {
            needed: 3,
            actual: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

/// Two-pass Pearson correlation, clamped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(Error::ZeroVariance);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation between a factor and the returns that follow it.
/// The caller aligns `fwd_returns[t]` with the return after `factor[t]`.
pub fn information_coefficient(factor: &[f64], fwd_returns: &[f64]) -> Result<f64> {
    pearson(factor, fwd_returns)
}

/// Spearman correlation: Pearson on midranks.
pub fn rank_ic(factor: &[f64], fwd_returns: &[f64]) -> Result<f64> {
    check_pair(factor, fwd_returns)?;
    if is_constant(factor) || is_constant(fwd_returns) {
        return Err(Error::ZeroVariance);
    }
    pearson(&midranks(factor), &midranks(fwd_returns))
}

/// Validity statistics for a set of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorStats {
    pub factor_names: Vec<String>,
    pub ic: Vec<f64>,
    pub rank_ic: Vec<f64>,
    /// Symmetric, unit diagonal.
    pub pairwise_corr: Vec<Vec<f64>>,
}

impl FactorStats {
    /// `columns[i]` is factor `i`, each aligned with `fwd_returns`.
    pub fn compute(factor_names: Vec<String>, columns: &[Vec<f64>], fwd_returns: &[f64]) -> Result<FactorStats> {
        let k = columns.len();
        if factor_names.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                actual: factor_names.len(),
            });
        }
        let ic = columns
            .iter()
            .map(|c| information_coefficient(c, fwd_returns))
            .collect::<Result<Vec<_>>>()?;
        let rank = columns
            .iter()
            .map(|c| rank_ic(c, fwd_returns))
            .collect::<Result<Vec<_>>>()?;
        let mut corr = vec![vec![0.0; k]; k];
        for i in 0..k {
            corr[i][i] = 1.0;
            for j in i + 1..k {
                let r = pearson(&columns[i], &columns[j])?;
                corr[i][j] = r;
                corr[j][i] = r;
            }
        }
        Ok(FactorStats {
            factor_names,
            ic,
            rank_ic: rank,
            pairwise_corr: corr,
        })
    }

    /// `factor,ic,rank_ic,selected`
    pub fn write_report<W: Write>(&self, selected: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["factor", "ic", "rank_ic", "selected"])?;
        for (i, name) in self.factor_names.iter().enumerate() {
            let sel = selected.contains(name);
            w.write_record([name.clone(), self.ic[i].to_string(), self.rank_ic[i].to_string(), sel.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Square correlation matrix with a leading `factor` column.
    pub fn write_correlations<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["factor".to_string()];
        header.extend(self.factor_names.iter().cloned());
        w.write_record(&header)?;
        for (i, name) in self.factor_names.iter().enumerate() {
            let mut row = vec![name.clone()];
            row.extend(self.pairwise_corr[i].iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
