use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input; the message names the offending field.
    #[error("invalid config: {field}: {msg}")]
    Validation { field: String, msg: String },
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn invalid(field: impl Into<String>, msg: impl Into<String>) -> Self {
        CliError::Validation { field: field.into(), msg: msg.into() }
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Runtime(_) | CliError::Io { .. } => 3,
        }
    }
}
