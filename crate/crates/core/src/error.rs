use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs disagree on dimensions, feature names or orderings.
    #[error("schema error: {0}")]
    Schema(String),

    /// Invalid arguments or configuration (CLI flags, ordering files, budgets).
    #[error("config error: {0}")]
    Config(String),

    /// Malformed, empty or non-finite data.
    #[error("data error: {0}")]
    Data(String),

    /// A linear-algebra step failed (singular system, indefinite covariance).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Value outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coalition enumeration limited to {limit} features, got {n}")]
    EnumerationLimit { n: usize, limit: usize },

    /// Kernel regression could not be solved with the chosen coalitions.
    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("model load error in layer {layer}: {msg}")]
    ModelLoad { layer: usize, msg: String },

    #[error("report comparison error: {0}")]
    Comparison(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 = configuration, 3 = data, 4 = numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Schema(_) | Error::Comparison(_) | Error::ModelLoad { .. } => 2,
            Error::EnumerationLimit { .. } | Error::Domain(_) => 2,
            Error::Data(_) | Error::Io { .. } | Error::Json(_) | Error::Csv(_) => 3,
            Error::Numeric(_) | Error::Estimation(_) => 4,
        }
    }
}
