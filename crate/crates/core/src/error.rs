use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed or invalid content in an input table. `row` is the 1-based
    /// line number in the file (the header is line 1).
    #[error("{source_name}: line {row}: {message}")]
    Table {
        source_name: String,
        row: usize,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),

    /// An internal consistency check failed. Never caused by user input.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn table(source_name: &str, row: usize, message: impl Into<String>) -> Self {
        Error::Table {
            source_name: source_name.to_string(),
            row,
            message: message.into(),
        }
    }

    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }

    pub(crate) fn from_csv(source_name: &str, err: csv::Error) -> Self {
        let row = err.position().map(|p| p.line() as usize).unwrap_or(0);
        Error::Table {
            source_name: source_name.to_string(),
            row,
            message: err.to_string(),
        }
    }
}
