use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("input error: {0}")]
    Input(String),

    /// A quantity that has no value on the given data (MLU of zero
    /// utterances, average degree of an empty graph, ...).
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("unknown node {0:?}")]
    UnknownNode(String),

    #[error("incompatible provenance: {0}")]
    IncompatibleProvenance(String),

    #[error("window {window}: visit {visit} is not in the corpus")]
    MissingFile { window: String, visit: usize },

    #[error("stage labels do not align: {0}")]
    Misaligned(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Parse { .. }
            | Error::Read { .. }
            | Error::Write { .. }
            | Error::Input(_)
            | Error::Undefined(_)
            | Error::UnknownNode(_)
            | Error::MissingFile { .. } => 1,
            Error::IncompatibleProvenance(_) | Error::Misaligned(_) | Error::Invariant(_) => 3,
        }
    }
}
