use std::path::PathBuf;

use riskbench::RiskError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config values or estimator parameters.
    #[error("{0}")]
    Validation(String),
    /// Malformed or unusable input data.
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Prefixes the message with some context, keeping the category.
    pub(crate) fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{ctx}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{ctx}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{ctx}: {m}")),
            io => io,
        }
    }
}

impl From<RiskError> for CliError {
    fn from(e: RiskError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else if e.is_validation() || matches!(e, RiskError::DegreesOfFreedom { .. }) {
            CliError::Validation(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
