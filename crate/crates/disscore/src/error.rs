use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {file} at line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("alignment error: {file} has {actual} sentences, expected {expected}")]
    Alignment {
        file: String,
        expected: usize,
        actual: usize,
    },

    #[error("duplicate lexicon entry: {0}")]
    Duplicate(String),

    #[error("unmapped relation label: {0}")]
    UnmappedLabel(String),

    #[error("unknown candidate label: {0}")]
    UnknownLabel(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("training error: {0}")]
    Training(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}
