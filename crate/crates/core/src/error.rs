use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node {node} out of range for graph with {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },

    #[error("{}: row {row}, column `{column}`: {message}", path.display())]
    Record {
        path: PathBuf,
        row: u64,
        column: String,
        message: String,
    },

    #[error("{}: input file not found", .0.display())]
    MissingInput(PathBuf),

    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },

    #[error("PageRank did not converge after {iterations} iterations (residual {residual:.3e})")]
    PageRankNotConverged {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("degenerate data: {0}")]
    Data(String),

    #[error("suspected complete or quasi-complete separation: {0}")]
    Separation(String),

    #[error("logistic fit failed: {0}")]
    Numerical(String),

    #[error("too many failed iterations: {failed} of {total}")]
    ExperimentFailed { failed: usize, total: usize },

    #[error("{}: {source}", path.display())]
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
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 usage, 2 data validation, 3 numerical or output failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::NodeOutOfRange { .. }
            | Error::Record { .. }
            | Error::Schema { .. }
            | Error::MissingInput(_)
            | Error::Data(_)
            | Error::Csv(_) => 2,
            Error::Json(e) if !e.is_io() => 2,
            _ => 3,
        }
    }
}
