use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("hypervector dimension must be positive")]
    ZeroDimension,

    #[error("cannot finalize an empty bundle")]
    EmptyBundle,

    #[error("invalid hypervector hex: {0}")]
    InvalidHex(String),

    #[error("degenerate rule-90 seed (all-zeros or all-ones)")]
    DegenerateSeed,

    #[error("no valid channel triple exists for a bank of {0} vectors (need at least 3)")]
    BankTooSmall(usize),

    #[error(
        "bank of {bank} vectors yields {capacity} channel sets but {requested} were requested; \
         min_bank_size is {required}"
    )]
    InsufficientBank {
        bank: usize,
        capacity: usize,
        requested: usize,
        required: usize,
    },

    #[error("channel {channel} out of range for a layout with {total} channels")]
    ChannelOutOfRange { channel: usize, total: usize },

    #[error("channel {requested} requested out of order; generative providers expect {expected} (or 0 to start a new pass)")]
    OutOfOrder { requested: usize, expected: usize },

    #[error("modality {0} has no channels")]
    EmptyModality(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("class {0} has no training samples")]
    EmptyClass(usize),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("associative memory has not been finalized")]
    NotFinalized,

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure comes from input data rather than from how the
    /// engine was configured or called.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_)
            | Error::EmptyClass(_)
            | Error::LabelOutOfRange { .. } => true,
            Error::Fold { source, .. } => source.is_data_error(),
            _ => false,
        }
    }
}
