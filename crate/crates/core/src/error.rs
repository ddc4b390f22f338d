use thiserror::Error;

use crate::message::ChannelId;

/// Errors produced anywhere in the ranking pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("scene `{0}` has no persons")]
    EmptyScene(String),

    #[error("scene `{scene}` contains duplicate person id `{person}`")]
    DuplicatePersonId { scene: String, person: String },

    #[error("person `{person}` in scene `{scene}` has a non-positive box after clamping")]
    NonPositiveBox { scene: String, person: String },

    #[error("scene `{scene}`: {what} is not finite")]
    NonFinite { scene: String, what: String },

    #[error("scene `{0}` marks more than one person as ground truth")]
    MultipleGroundTruth(String),

    #[error("scene `{scene}`: {kind} embeddings have inconsistent dimensions")]
    EmbeddingDimMismatch { scene: String, kind: &'static str },

    #[error("person index {index} out of range for {len} persons")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("person `{0}` has no yaw angle")]
    MissingYaw(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("channel {0} is not active for every person")]
    ChannelInactive(ChannelId),

    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("channel mismatch: {0} vs {1}")]
    ChannelMismatch(ChannelId, ChannelId),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("per-channel scores are misaligned: {0}")]
    ChannelMisalignment(String),

    #[error("no channel is active for both the scene and the weights")]
    NoActiveChannels,

    #[error("scene `{0}` has no ground-truth important person")]
    MissingGroundTruth(String),

    #[error("validation set is empty")]
    EmptyValidation,

    #[error("no records for category `{0}`")]
    EmptyCategory(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("linear system is singular")]
    SingularSystem,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
