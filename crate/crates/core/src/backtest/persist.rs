use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use crate::error::Result;
use crate::risk::write_reports;

use super::engine::BacktestResult;

/// Writes `equity.csv`, `weights.csv`, `report.csv` and `regimes.csv`
/// into `dir`, creating it if needed.
pub fn write_run_dir(result: &BacktestResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("equity.csv"))?));
    w.write_record(["date", "equity"])?;
    for (d, e) in result.equity.dates.iter().zip(&result.equity.equity) {
        w.write_record([d.to_string(), e.to_string()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("weights.csv"))?));
    w.write_record(["date", "asset_id", "weight"])?;
    for (d, weights) in result.oos_dates().iter().zip(&result.weights_history) {
        for (id, x) in result.asset_ids.iter().zip(weights) {
            w.write_record([d.to_string(), id.clone(), x.to_string()])?;
        }
    }
    w.flush()?;

    let name = result.model.as_str();
    let mut rows = vec![(name.to_string(), result.overall)];
    rows.extend(
        result
            .per_regime
            .iter()
            .map(|r| (format!("{name}:{}", r.regime), r.report)),
    );
    write_reports(&rows, BufWriter::new(File::create(dir.join("report.csv"))?))?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("regimes.csv"))?));
    w.write_record(["date", "label"])?;
    for (d, l) in result.oos_dates().iter().zip(&result.regimes) {
        w.write_record([d.to_string(), l.map(|r| r.as_str()).unwrap_or("").to_string()])?;
    }
    w.flush()?;
    Ok(())
}
