use chsh_core::GameError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Csv(#[from] csv::Error),

    /// A protocol rule was broken while the game was running.
    #[error("protocol violation: {0}")]
    Protocol(GameError),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) | CliError::Io { .. } | CliError::Csv(_) => 2,
            CliError::Protocol(_) => 3,
        }
    }

    /// Round at which the violation happened, if any.
    pub fn round(&self) -> Option<u64> {
        match self {
            CliError::Protocol(e) => e.round(),
            _ => None,
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::ConsistencyViolation { .. }
            | GameError::ReplayExhausted(_)
            | GameError::StreamExhausted(_)
            | GameError::NonFinite => CliError::Protocol(e),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
