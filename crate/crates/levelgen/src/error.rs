use std::path::PathBuf;

use levelgen_core::{CmaError, LatentError, LevelError, MetricError, SimError, StatsError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Level {
        path: PathBuf,
        #[source]
        source: LevelError,
    },
    #[error("{path}: line {line}: {message}")]
    EventLog { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Render(#[from] LevelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Cma(#[from] CmaError),
    #[error(transparent)]
    Latent(#[from] LatentError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("group {0} has no levels")]
    EmptyGroup(String),
    #[error("no levels found in {0}")]
    EmptyCorpus(PathBuf),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait IoContext<T> {
    fn at(self, path: &std::path::Path) -> Result<T>;
}

impl<T> IoContext<T> for std::result::Result<T, std::io::Error> {
    fn at(self, path: &std::path::Path) -> Result<T> {
        self.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

impl<T> IoContext<T> for std::result::Result<T, serde_json::Error> {
    fn at(self, path: &std::path::Path) -> Result<T> {
        self.map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

impl<T> IoContext<T> for std::result::Result<T, csv::Error> {
    fn at(self, path: &std::path::Path) -> Result<T> {
        self.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })
    }
}
