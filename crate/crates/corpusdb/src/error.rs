//! Error taxonomy shared by the whole crate.
//!
//! The CLI maps these onto exit codes: [`Error::Usage`] exits with 1,
//! everything else with 2.

use std::path::PathBuf;

use crate::populate::PopulationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A directory exists but holds no containers; distinct from I/O failure.
    #[error("no containers found under {0}")]
    EmptyContainerSet(PathBuf),

    /// The container itself could not be decoded (corrupt gzip or broken
    /// JSON framing). Record-level problems are counted, not raised.
    #[error("cannot parse container {path} (byte offset {offset}): {message}")]
    ContainerParse {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    /// Schema construction violated an invariant.
    #[error("invalid schema: {0}")]
    Schema(String),

    /// A selector, column, or table does not resolve against the schema.
    #[error("cannot resolve {0}")]
    Resolution(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("CSV header mismatch in {path}: expected [{expected}], found [{found}]")]
    CsvHeader {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error(transparent)]
    Sql(#[from] rusqlite::Error),

    /// Population stopped mid-run; the destination holds a partial result.
    /// The report records the last fully committed container.
    #[error("population aborted ({message}); database is partially populated")]
    PopulateAborted {
        message: String,
        report: Box<PopulationReport>,
    },

    #[error("script {script} failed at statement {statement}: {source}")]
    Script {
        script: PathBuf,
        statement: usize,
        #[source]
        source: rusqlite::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit code the CLI should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            _ => 2,
        }
    }
}
