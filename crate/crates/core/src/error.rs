use std::path::PathBuf;

use crate::domain::GroupId;

pub type Result<T> = std::result::Result<T, Error>;

/// A single rejected CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowIssue {
    /// 1-based data row index (the header is row 0).
    pub row: usize,
    pub reason: String,
}

impl std::fmt::Display for RowIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "row {}: {}", self.row, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("group {0} has no agents")]
    EmptyGroup(GroupId),

    #[error("solver requires {required} iterations, above the configured cap of {cap}")]
    IterationCap { required: u64, cap: u64 },

    #[error("threshold grid has {size} points, above the configured cap of {cap}")]
    GridTooLarge { size: u128, cap: u64 },

    #[error("{} malformed row(s): {}", .0.len(), format_rows(.0))]
    MalformedRows(Vec<RowIssue>),

    #[error("unknown category {value:?} in column {column:?}")]
    UnknownCategory { column: String, value: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

fn format_rows(rows: &[RowIssue]) -> String {
    const SHOWN: usize = 5;
    let mut out = rows
        .iter()
        .take(SHOWN)
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ");
    if rows.len() > SHOWN {
        out.push_str(&format!("; ... and {} more", rows.len() - SHOWN));
    }
    out
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
