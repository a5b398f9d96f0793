use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("normalized level undefined: tau = {tau} must lie in (0, n = {n})")]
    LevelUndefined { tau: f64, n: usize },

    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("sample too short: {0}")]
    SampleTooShort(String),

    #[error("estimate undefined: {0}")]
    UndefinedEstimate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("arity error: {0}")]
    Arity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
