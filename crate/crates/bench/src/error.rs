use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dikw_privacy::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot encode {what}: {message}")]
    Encode { what: String, message: String },
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn encode(what: &str, message: impl ToString) -> Self {
        BenchError::Encode {
            what: what.into(),
            message: message.to_string(),
        }
    }

    /// 1 for bad input (config, data, parameters), 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        use dikw_privacy::Error as E;
        match self {
            BenchError::Config(_) => 1,
            BenchError::Core(E::Io { .. } | E::Degenerate(_)) => 2,
            BenchError::Core(_) => 1,
            BenchError::Io { .. } | BenchError::Encode { .. } => 2,
        }
    }
}
