use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use factorbt::backtest::{
    compare_models, optimization_sweep, walk_forward, write_run_dir, write_sweep, BacktestResult, ModelKind, LADDER,
};
use factorbt::factors::screen_factors;
use factorbt::lstm::{make_windows, train, write_params};
use factorbt::marketdata::{
    asset_returns, clean, compute_factors, load_panel, synth_generate, varying_factors, write_index, write_prices,
    MarketPanel, Standardizer,
};

use crate::config::{DataSource, RunConfig};
use crate::error::{io_err, CliError};

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Raw panel from the configured source, then cleaned.
pub fn load_market(cfg: &RunConfig) -> Result<MarketPanel, CliError> {
    let raw = match &cfg.data {
        DataSource::Synth(s) => synth_generate(s, cfg.synth_seed()?)?.panel,
        DataSource::Csv(c) => {
            for p in [&c.prices, &c.index] {
                fs::metadata(p).map_err(io_err(p))?;
            }
            load_panel(&c.prices, &c.index, &c.industry_map)?
        }
    };
    Ok(clean(&raw, &cfg.clean)?)
}

/// Writes `prices.csv` and `index.csv` for a synthetic source.
pub fn cmd_generate(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let DataSource::Synth(s) = &cfg.data else {
        return Err(CliError::Config("generate needs a `synth` data source".into()));
    };
    let market = synth_generate(s, cfg.synth_seed()?)?;
    let prices = out.join("prices.csv");
    let index = out.join("index.csv");
    write_prices(&market.panel, create(&prices)?)?;
    write_index(&market.panel, create(&index)?)?;
    Ok(vec![prices, index])
}

#[derive(Debug, Serialize)]
struct ModelMeta {
    hidden_size: usize,
    window: usize,
    factors: Vec<String>,
    factor_mean: Vec<f64>,
    factor_std: Vec<f64>,
    target_mean: f64,
    target_scale: f64,
    seed: u64,
}

/// Fits one LSTM on the whole panel. Writes `model.fbtl`, `model.json`
/// (feature scaling and target scaling), `training.csv` and `factors.csv`.
pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<Vec<f64>, CliError> {
    let seed = cfg.model_seed()?;
    let panel = load_market(cfg)?;
    let factors = compute_factors(&panel)?;
    let returns = asset_returns(&panel)?;
    let n = factors.n_days();
    if n < 3 {
        return Err(factorbt::Error::InsufficientData(format!("{n} return days")).into());
    }
    let raw = factors.select(&varying_factors(&factors, 0..n))?;
    let scaler = Standardizer::fit(&raw, 0..n)?;
    let standardized = scaler.apply(&raw)?;
    let (selected, stats) = screen_factors(&standardized, &returns, 0..n - 1, &cfg.screen)?;
    let features = standardized.select(&selected)?;

    let tcfg = factorbt::lstm::TrainConfig {
        seed,
        ..cfg.train.clone()
    };
    let mut samples = make_windows(&features, &returns, tcfg.window)?;
    let count = samples.len() as f64;
    let target_mean = samples.iter().map(|s| s.target).sum::<f64>() / count;
    let sd = (samples.iter().map(|s| (s.target - target_mean).powi(2)).sum::<f64>() / count).sqrt();
    let target_scale = if sd > 0.0 { sd } else { 1.0 };
    for s in &mut samples {
        s.target = (s.target - target_mean) / target_scale;
    }
    let outcome = train(&samples, &tcfg)?;

    write_params(&outcome.params, create(&out.join("model.fbtl"))?)?;
    let idx: Vec<usize> = selected
        .iter()
        .map(|f| scaler.factor_names.iter().position(|g| g == f).unwrap())
        .collect();
    let meta = ModelMeta {
        hidden_size: tcfg.hidden_size,
        window: tcfg.window,
        factors: selected.clone(),
        factor_mean: idx.iter().map(|&i| scaler.mean[i]).collect(),
        factor_std: idx.iter().map(|&i| scaler.std[i]).collect(),
        target_mean,
        target_scale,
        seed,
    };
    let meta_path = out.join("model.json");
    let mut w = create(&meta_path)?;
    serde_json::to_writer_pretty(&mut w, &meta).map_err(|e| CliError::Io {
        path: meta_path.clone(),
        source: e.into(),
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(&meta_path))?;

    let mut w = csv_writer(&out.join("training.csv"))?;
    w.write_record(["epoch", "loss"]).map_err(factorbt::Error::from)?;
    for (e, loss) in outcome.loss_curve.iter().enumerate() {
        w.write_record([(e + 1).to_string(), loss.to_string()]).map_err(factorbt::Error::from)?;
    }
    w.flush().map_err(io_err(out.join("training.csv")))?;
    stats.write_report(&selected, create(&out.join("factors.csv"))?)?;
    Ok(outcome.loss_curve)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    Ok(csv::Writer::from_writer(create(path)?))
}

/// Walk-forward for every requested model, run directories under
/// `out/<model>/`, and `comparison.csv` / `comparison.txt`. Returns the
/// plain-text table.
pub fn cmd_backtest(cfg: &RunConfig, out: &Path, only: Option<&[ModelKind]>) -> Result<String, CliError> {
    let models = cfg.backtest_models(only);
    let configs = models
        .iter()
        .map(|&m| cfg.backtest_config(m))
        .collect::<Result<Vec<_>, _>>()?;
    let panel = load_market(cfg)?;
    let results: Vec<factorbt::Result<BacktestResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| {
                let panel = &panel;
                s.spawn(move || walk_forward(panel, c))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    });
    let results = results.into_iter().collect::<factorbt::Result<Vec<_>>>()?;

    for r in &results {
        write_run_dir(r, &out.join(r.model.as_str()))?;
    }
    let named: Vec<(String, &BacktestResult)> = results.iter().map(|r| (r.model.label().to_string(), r)).collect();
    let table = compare_models(&named)?;
    table.write_csv(create(&out.join("comparison.csv"))?)?;
    let text = table.to_text();
    let txt_path = out.join("comparison.txt");
    let mut w = create(&txt_path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(io_err(&txt_path))?;
    Ok(text)
}

/// Runs the full ladder and writes `sweep.csv`; returns its contents.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let base = cfg.backtest_config(ModelKind::Lstm)?;
    let panel = load_market(cfg)?;
    let rows = optimization_sweep(&panel, &base, &LADDER)?;
    let mut buf = Vec::new();
    write_sweep(&rows, &mut buf)?;
    let path = out.join("sweep.csv");
    let mut w = create(&path)?;
    w.write_all(&buf).and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}
