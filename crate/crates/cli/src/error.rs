use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: field `{field}`: {message}")]
    Field {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] geqnewton_core::Error),

    #[error("serializing report: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn field(path: impl Into<PathBuf>, field: &str, message: impl ToString) -> Self {
        CliError::Field {
            path: path.into(),
            field: field.to_string(),
            message: message.to_string(),
        }
    }
}
