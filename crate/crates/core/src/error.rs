use thiserror::Error;

/// Errors raised by the protocol engines, policies and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("invalid setting {0}")]
    InvalidSetting(u8),

    #[error("invalid outcome {0}, expected +1 or -1")]
    InvalidOutcome(i8),

    #[error("invalid hidden variable {0:?}, expected four of '+'/'-'")]
    InvalidHiddenVariable(String),

    #[error("invalid betting distribution: {0}")]
    InvalidDistribution(String),

    #[error("alphabet must have at least two symbols, got {0}")]
    AlphabetTooSmall(usize),

    #[error("symbol {symbol} outside alphabet of size {size}")]
    InvalidSymbol { symbol: usize, size: usize },

    #[error("capital update produced a non-finite log value")]
    NonFinite,

    #[error(
        "round {round}: hidden variable {lambda} has X_{setting} = {found}, but Nature A announced {announced}"
    )]
    ConsistencyViolation {
        round: u64,
        setting: u8,
        announced: i8,
        found: i8,
        lambda: String,
    },

    #[error("no rounds were played under setting pair {0}")]
    EmptyContext(String),

    #[error("reality stream exhausted after {0} symbols")]
    StreamExhausted(u64),

    #[error("replay list exhausted at round {0}")]
    ReplayExhausted(u64),

    #[error("a run needs at least one round")]
    ZeroRounds,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl GameError {
    /// Round at which a protocol rule was broken, if the error carries one.
    pub fn round(&self) -> Option<u64> {
        match self {
            GameError::ConsistencyViolation { round, .. } => Some(*round),
            GameError::ReplayExhausted(round) => Some(*round),
            GameError::StreamExhausted(n) => Some(n + 1),
            _ => None,
        }
    }
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;
