use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("singular: {0}")]
    Singular(&'static str),
    #[error("no real equivalent waist: target width {target} m is below the attainable minimum {min} m")]
    NoEquivalentWaist { target: f64, min: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
