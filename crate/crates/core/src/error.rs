use thiserror::Error;

/// Errors raised by the engine. Each variant maps onto one code of the
/// closed protocol error set via [`Error::code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("missing reference: {0}")]
    MissingReference(String),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("episode finished")]
    EpisodeFinished,
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("generation failed: {0}")]
    GenerationFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    /// Wire error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid-config",
            Error::InvalidLayout(_) => "invalid-layout",
            Error::MissingReference(_) => "missing-reference",
            Error::EpisodeFinished => "episode-finished",
            Error::Capacity(_) => "capacity",
            Error::GenerationFailed(_) => "generation-failed",
            Error::InvalidConstraint(_) | Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) | Error::Image(_) => {
                "invalid-input"
            }
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
