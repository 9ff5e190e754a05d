use std::io;

use thiserror::Error;

use crate::relnet::Io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} for {what} outside its allowed range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("spikes supplied for target population {0:?}")]
    TargetSpikesSupplied(Io),

    #[error("missing input spikes for population {0:?}")]
    MissingInput(Io),

    #[error("backward step requested before any forward phase")]
    BackwardBeforeForward,

    #[error("undecodable output: no positive activity")]
    Undecodable,

    #[error("bad magic number: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated file: {0}")]
    Truncated(String),

    #[error("image/label count mismatch: {images} images, {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("filter produced an empty set")]
    EmptySet,

    #[error("corrupt checkpoint header")]
    CorruptHeader,

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("checkpoint population sizes {found:?} do not match configured sizes {expected:?}")]
    SizeMismatch { expected: [usize; 7], found: [usize; 7] },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
