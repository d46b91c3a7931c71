use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("outlet {0} is not confirmed")]
    Unconfirmed(usize),
    #[error("enumeration refused: {0}")]
    TooLarge(String),
    #[error("predicate is not ordering-measurable")]
    NotOrderingMeasurable,
    #[error("duplicate weight {0}")]
    DuplicateWeight(f64),
    #[error("rejection sampler gave up after {0} attempts")]
    Exhausted(u64),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
