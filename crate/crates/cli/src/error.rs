use std::fmt;
use std::path::PathBuf;

use factorbt::Error;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent configuration.
    Config(String),
    /// Filesystem failure on a named path.
    Io { path: PathBuf, source: std::io::Error },
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e.root() {
                Error::InvalidConfig(_) | Error::InvalidParameter(_) => 2,
                Error::Io(_) | Error::Csv(_) | Error::Malformed(_) | Error::InvalidModelFile(_) => 3,
                Error::DivergedLoss { .. } => 4,
                Error::InsufficientData(_) | Error::TooShort { .. } => 5,
                _ => 1,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
