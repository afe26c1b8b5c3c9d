use thiserror::Error;

use crate::groups::GroupDescriptor;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group descriptor: {0}")]
    InvalidGroup(String),

    #[error("element {element} does not belong to {group}")]
    ForeignElement { element: String, group: GroupDescriptor },

    #[error("group mismatch: {left} vs {right}")]
    GroupMismatch {
        left: GroupDescriptor,
        right: GroupDescriptor,
    },

    #[error("region has {size} elements, above the enumeration cap of {cap}")]
    RegionTooLarge { size: u128, cap: usize },

    #[error("invalid radius {0}")]
    InvalidRadius(f64),

    #[error("malformed word {word:?}: {reason}")]
    BadWord { word: String, reason: String },

    #[error("invalid cocycle: {0}")]
    InvalidCocycle(String),

    #[error("invalid multiplier: {0}")]
    InvalidMultiplier(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("missing annulus constant for annulus {0}")]
    MissingAnnulusConstant(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel does not decay below {threshold} within length {cap}")]
    NoDecay { threshold: f64, cap: u64 },

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("term {index}: {msg}")]
    BadTerm { index: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
