use thiserror::Error;

/// Errors raised by the game engine, solvers and abstraction pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WevaError {
    #[error("invalid card id {0}")]
    InvalidCard(u8),
    #[error("duplicate card {0} in hand/board")]
    DuplicateCard(String),
    #[error("invalid bet fraction {0}")]
    InvalidBetFraction(f64),
    #[error("decision depth {depth} exceeds depth-weight table length {limit}")]
    DepthExceeded { depth: usize, limit: usize },
    #[error("incompatible hand pair ({0}, {1}) queried")]
    IncompatiblePair(usize, usize),
    #[error("node {0} is not a terminal")]
    NotTerminal(usize),
    #[error("feature {feature} is not available for game {game}")]
    UnsupportedFeature { feature: String, game: String },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("warm-up needs at least one iteration")]
    ZeroWarmup,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rank correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("negative exploitability {0} (best-response bug)")]
    NegativeExploitability(f64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, WevaError>;
