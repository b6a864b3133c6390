use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use factorbt::backtest::{BacktestConfig, ModelKind};
use factorbt::factors::ScreenConfig;
use factorbt::lstm::TrainConfig;
use factorbt::marketdata::{CleanPolicy, SynthConfig};

use crate::error::{io_err, CliError};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub prices: PathBuf,
    pub index: PathBuf,
    /// Asset id to industry name, for ids without an `<industry>.` prefix.
    #[serde(default)]
    pub industry_map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    Synth(SynthConfig),
    Csv(CsvSource),
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::Linear, ModelKind::Lstm]
}

/// One run, as read from JSON. Relative paths resolve against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSource,
    #[serde(default)]
    pub clean: CleanPolicy,
    #[serde(default)]
    pub screen: ScreenConfig,
    #[serde(default)]
    pub backtest: BacktestConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<RunConfig, CliError> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        if let DataSource::Csv(c) = &mut cfg.data {
            rebase(&mut c.prices);
            rebase(&mut c.index);
        }
        rebase(&mut cfg.output_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        RunConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn validate(&self) -> Result<(), CliError> {
        let wrap = |e: factorbt::Error| CliError::Config(e.to_string());
        self.clean.validate().map_err(wrap)?;
        self.screen.validate().map_err(wrap)?;
        if let DataSource::Synth(s) = &self.data {
            s.validate().map_err(wrap)?;
        }
        if self.models.is_empty() {
            return Err(CliError::Config("`models` must list at least one model".into()));
        }
        Ok(())
    }

    /// Seed for the synthetic generator: `data.synth.seed`, else `seed`.
    pub fn synth_seed(&self) -> Result<u64, CliError> {
        match &self.data {
            DataSource::Synth(s) => s.seed.or(self.seed).ok_or_else(missing_seed),
            DataSource::Csv(_) => Err(CliError::Config("this command needs a `synth` data source".into())),
        }
    }

    /// Seed for model training: `seed`, else the synthetic generator's.
    pub fn model_seed(&self) -> Result<u64, CliError> {
        let synth = match &self.data {
            DataSource::Synth(s) => s.seed,
            DataSource::Csv(_) => None,
        };
        self.seed.or(synth).ok_or_else(missing_seed)
    }

    /// Models to backtest: the linear benchmark first, then the rest in
    /// their usual order.
    pub fn backtest_models(&self, only: Option<&[ModelKind]>) -> Vec<ModelKind> {
        let mut models: Vec<ModelKind> = only.unwrap_or(&self.models).to_vec();
        models.push(ModelKind::Linear);
        models.sort();
        models.dedup();
        models
    }

    /// Backtest settings with the run-level screen, training block and seed.
    pub fn backtest_config(&self, model: ModelKind) -> Result<BacktestConfig, CliError> {
        let seed = match model {
            ModelKind::Linear => self.model_seed().unwrap_or(0),
            ModelKind::Lstm => self.model_seed()?,
        };
        let cfg = BacktestConfig {
            model_kind: model,
            train_cfg: TrainConfig {
                seed,
                ..self.train.clone()
            },
            seed,
            screen: self.screen,
            ..self.backtest.clone()
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn missing_seed() -> CliError {
    CliError::Config("missing required key `seed` (top level or data.synth.seed)".into())
}
