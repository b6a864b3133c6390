use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::marketdata::Regime;
use crate::risk::RiskReport;

use super::engine::BacktestResult;

const MINUS: char = '\u{2212}';

/// `value` as a percentage with `decimals` places and a typographic minus.
pub fn format_percent(value: f64, decimals: usize) -> String {
    format!("{}%", format_signed(value * 100.0, decimals))
}

/// Fixed-point with a typographic minus; values that round to zero are unsigned.
pub fn format_signed(value: f64, decimals: usize) -> String {
    let s = format!("{value:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().any(|c| c.is_ascii_digit() && c != '0') => format!("{MINUS}{rest}"),
        Some(rest) => rest.to_string(),
        None => s,
    }
}

fn format_sharpe(sharpe: Option<f64>) -> String {
    sharpe.map(|s| format_signed(s, 2)).unwrap_or_else(|| "n/a".into())
}

/// Max drawdown, Sharpe and VaR cells: `["12.5%", "0.68", "−2.35%"]`.
pub fn overall_cells(r: &RiskReport) -> [String; 3] {
    [format_percent(r.max_drawdown, 1), format_sharpe(r.sharpe), format_percent(r.var95, 2)]
}

/// Mean daily return (percent, 3 places), drawdown (percent, 2 places)
/// and Sharpe: `["0.352", "4.95", "0.72"]`.
pub fn regime_cells(r: &RiskReport) -> [String; 3] {
    [
        format_signed(r.mean_daily_return * 100.0, 3),
        format_signed(r.max_drawdown * 100.0, 2),
        format_sharpe(r.sharpe),
    ]
}

pub fn format_overall_row(r: &RiskReport, sep: &str) -> String {
    overall_cells(r).join(sep)
}

pub fn format_regime_row(r: &RiskReport, sep: &str) -> String {
    regime_cells(r).join(sep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeRow {
    pub regime: Regime,
    pub model: String,
    pub days: usize,
    pub report: RiskReport,
}

/// One row per model overall, plus regime × model rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub overall: Vec<(String, RiskReport)>,
    pub per_regime: Vec<RegimeRow>,
}

/// Tabulates named results that share an out-of-sample calendar.
pub fn compare_models(results: &[(String, &BacktestResult)]) -> Result<ComparisonTable> {
    if let Some((_, first)) = results.first() {
        if results.iter().any(|(_, r)| r.equity.dates != first.equity.dates) {
            return Err(Error::CalendarMismatch);
        }
    }
    let overall = results.iter().map(|(n, r)| (n.clone(), r.overall)).collect();
    let mut per_regime = Vec::new();
    for regime in Regime::ALL {
        for (name, r) in results {
            if let Some(rr) = r.per_regime.iter().find(|x| x.regime == regime) {
                per_regime.push(RegimeRow {
                    regime,
                    model: name.clone(),
                    days: rr.days,
                    report: rr.report,
                });
            }
        }
    }
    Ok(ComparisonTable { overall, per_regime })
}

fn push_aligned(out: &mut String, cells: &[String], widths: &[usize]) {
    let line: Vec<String> = cells
        .iter()
        .zip(widths)
        .map(|(c, w)| format!("{c}{}", " ".repeat(w.saturating_sub(c.chars().count()))))
        .collect();
    let _ = writeln!(out, "{}", line.join("  ").trim_end());
}

fn render(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let head: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    push_aligned(&mut out, &head, &widths);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    push_aligned(&mut out, &rule, &widths);
    for row in rows {
        push_aligned(&mut out, row, &widths);
    }
    out
}

impl ComparisonTable {
    pub fn to_text(&self) -> String {
        let overall: Vec<Vec<String>> = self
            .overall
            .iter()
            .map(|(n, r)| {
                let mut row = vec![n.clone()];
                row.extend(overall_cells(r));
                row
            })
            .collect();
        let mut out = render(&["Model", "Max Drawdown", "Sharpe Ratio", "VaR (95%)"], &overall);
        if !self.per_regime.is_empty() {
            let regimes: Vec<Vec<String>> = self
                .per_regime
                .iter()
                .map(|r| {
                    let mut row = vec![r.regime.to_string(), r.model.clone(), r.days.to_string()];
                    row.extend(regime_cells(&r.report));
                    row.push(format_percent(r.report.var95, 2));
                    row
                })
                .collect();
            out.push('\n');
            out.push_str(&render(
                &["Regime", "Model", "Days", "Mean daily (%)", "Max DD (%)", "Sharpe", "VaR (95%)"],
                &regimes,
            ));
        }
        out
    }

    /// Long format: `scope` is `overall` or a regime name; decimals throughout.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scope", "model", "days", "mean_daily_return", "max_drawdown", "sharpe", "var95"])?;
        let mut row = |scope: &str, model: &str, days: String, r: &RiskReport| {
            w.write_record([
                scope.to_string(),
                model.to_string(),
                days,
                r.mean_daily_return.to_string(),
                r.max_drawdown.to_string(),
                r.sharpe.map(|s| s.to_string()).unwrap_or_default(),
                r.var95.to_string(),
            ])
        };
        for (name, r) in &self.overall {
            row("overall", name, String::new(), r)?;
        }
        for r in &self.per_regime {
            row(r.regime.as_str(), &r.model, r.days.to_string(), &r.report)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(mdd: f64, sharpe: f64, var: f64) -> RiskReport {
        RiskReport {
            max_drawdown: mdd,
            sharpe: Some(sharpe),
            var95: var,
            volatility: 0.0,
            ann_return: 0.0,
            mean_daily_return: 0.0,
        }
    }

    #[test]
    fn overall_fixtures() {
        assert_eq!(format_overall_row(&metrics(0.125, 0.68, -0.0235), " "), "12.5% 0.68 −2.35%");
        assert_eq!(format_overall_row(&metrics(0.088, 0.90, -0.0188), " "), "8.8% 0.90 −1.88%");
        assert_eq!(format_overall_row(&metrics(0.088, 0.90, -0.0188), " | "), "8.8% | 0.90 | −1.88%");
    }

    #[test]
    fn regime_fixture() {
        let r = RiskReport {
            mean_daily_return: 0.00352,
            ..metrics(0.0495, 0.72, -0.01)
        };
        assert_eq!(format_regime_row(&r, " | "), "0.352 | 4.95 | 0.72");
    }

    #[test]
    fn signs() {
        assert_eq!(format_signed(-0.0004, 2), "0.00");
        assert_eq!(format_signed(-1.5, 1), "−1.5");
        assert_eq!(format_percent(0.0, 1), "0.0%");
        assert_eq!(format_sharpe(None), "n/a");
    }

    #[test]
    fn text_layout() {
        let t = ComparisonTable {
            overall: vec![
                ("Benchmark model".into(), metrics(0.125, 0.68, -0.0235)),
                ("LSTM model".into(), metrics(0.088, 0.90, -0.0188)),
            ],
            per_regime: vec![],
        };
        let text = t.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Model            Max Drawdown  Sharpe Ratio  VaR (95%)");
        assert_eq!(lines[2], "Benchmark model  12.5%         0.68          −2.35%");
        assert_eq!(lines[3], "LSTM model       8.8%          0.90          −1.88%");
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let csv = String::from_utf8(buf).unwrap();
        assert!(csv.starts_with("scope,model,days,mean_daily_return,max_drawdown,sharpe,var95\noverall,Benchmark model,,0,0.125,0.68,-0.0235\n"));
    }
}
