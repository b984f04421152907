use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point behind camera")]
    BehindCamera,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("degenerate configuration")]
    Degenerate,

    #[error("plane inconsistent with detection")]
    PlaneInconsistent,

    #[error("undefined recall")]
    UndefinedRecall,

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("empty alpha support: {0}")]
    EmptySupport(String),

    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("length mismatch: expected {expected} payload bytes, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for failures of the numerical routines (as opposed to bad data or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BehindCamera | Error::Degenerate | Error::PlaneInconsistent | Error::UndefinedRecall
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
