use std::path::Path;

use serde_json::json;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] fsvar::Error),

    /// Malformed data files, configuration or archives.
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Model(e) => match e {
                fsvar::Error::Dimension(_) => "dimension",
                fsvar::Error::Validation(_) => "validation",
                fsvar::Error::SampleSize(_) => "sample_size",
                fsvar::Error::SingularValue(_) => "singular_value",
                fsvar::Error::NotConverged { .. } => "not_converged",
                fsvar::Error::Numerical(_) => "numerical",
            },
            CliError::Input(_) => "validation",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "singular_value" | "not_converged" | "numerical" => 3,
            "io" => 4,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}
