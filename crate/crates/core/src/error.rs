use std::path::PathBuf;

use crate::corpus::PolarityLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: parse error: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: invalid record: {message}")]
    Validation { line: usize, message: String },

    #[error("score {score} is not valid on the {scale} scale")]
    InvalidScore { score: f64, scale: &'static str },

    #[error("score labeling is only defined for the ten-point scale")]
    UnsupportedScale,

    #[error("score 3 is neutral and must be excluded before mismatch detection")]
    NeutralScore,

    #[error("insufficient data for class {label}: need {needed}, have {available}")]
    InsufficientData {
        label: PolarityLabel,
        needed: usize,
        available: usize,
    },

    #[error("training set contains a single class")]
    SingleClass,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("length mismatch: {left} predictions vs {right} actual labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("attribute {0} is missing from the vocabulary document-frequency table")]
    Inconsistent(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model load error: {0}")]
    ModelLoad(String),

    #[error("unsupported model format version {found} (this build reads {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for usage or configuration problems, 2 for bad data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnsupportedScale => 1,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}
