use std::fmt;
use std::path::PathBuf;

use herz_schur::Error;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Json { path: PathBuf, source: serde_json::Error },
    Core(Error),
}

impl CliError {
    /// Stable tag printed with every error.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "E_USAGE",
            CliError::Io { .. } => "E_IO",
            CliError::Json { .. } => "E_JSON",
            CliError::Core(e) => match e {
                Error::CapExceeded { .. } => "E_CAP",
                Error::InvalidParameter { .. } => "E_PARAM",
                Error::EmptyKernel
                | Error::NotSquare { .. }
                | Error::EntryCount { .. }
                | Error::NotHermitian
                | Error::NotReal
                | Error::SizeMismatch(..)
                | Error::OutOfRange { .. }
                | Error::NotReduced(_)
                | Error::BadLetter { .. }
                | Error::NonzeroDiagonal { .. } => "E_INPUT",
                Error::Indeterminate { .. } | Error::Infeasible { .. } => "E_SOLVER",
                _ => "E_NUMERIC",
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Json { path, source } => write!(f, "malformed JSON in {}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
