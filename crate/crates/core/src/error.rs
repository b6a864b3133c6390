//! Error type shared by every stage of the pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // -- market data --
    #[error("series `{0}` has fewer than 2 observations")]
    EmptySeries(String),
    #[error("series `{asset}` has non-positive price {value} at position {index}")]
    NonPositivePrice {
        asset: String,
        index: usize,
        value: f64,
    },
    #[error("column `{0}` has no observed values")]
    AllMissingColumn(String),
    #[error("asset `{0}` lacks a P/E or P/B column")]
    MissingFundamental(String),
    #[error("factor `{0}` has zero variance over the fit range")]
    ZeroVarianceFactor(String),
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
    #[error("malformed market data: {0}")]
    Malformed(String),

    // -- factor statistics and regression --
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("no factors survive screening")]
    NoFactorsSurvive,
    #[error("design matrix is rank deficient; dependent columns: {0:?}")]
    RankDeficient(Vec<String>),

    // -- lstm --
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in input")]
    NonFiniteInput,
    #[error("tape was recorded against different parameters")]
    StaleTape,
    #[error("empty input")]
    EmptyInput,
    #[error("series too short: need more than {needed} observations, got {actual}")]
    TooShort { needed: usize, actual: usize },
    #[error("training loss diverged in epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("invalid model file: {0}")]
    InvalidModelFile(String),

    // -- risk --
    #[error("returns have zero volatility; ratio undefined")]
    ZeroVolatility,
    #[error("need at least {needed} observations, got {actual}")]
    TooFewObservations { needed: usize, actual: usize },

    // -- backtest --
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("results do not share a calendar")]
    CalendarMismatch,
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("sweep rung {rung}: {source}")]
    Rung {
        rung: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Strips fold/rung context and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Fold { source, .. } | Error::Rung { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn in_fold(self, fold: usize) -> Error {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_rung(self, rung: usize) -> Error {
        Error::Rung {
            rung,
            source: Box::new(self),
        }
    }
}
