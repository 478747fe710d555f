use std::io;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum StegoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("unreadable image: {0}")]
    Unreadable(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("image has a zero dimension")]
    ZeroDimension,

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("insufficient capacity: {required} bits required, at most {available} available")]
    Capacity { required: usize, available: usize },

    #[error("pair at row {row}, col {col} contains a saturated pixel")]
    SaturatedPair { row: usize, col: usize },

    #[error("invalid pair at row {row}, col {col}: {reason}")]
    InvalidPair {
        row: usize,
        col: usize,
        reason: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bit length {0} is not a multiple of 8")]
    BitLength(usize),

    #[error("key record too short: {0} bytes")]
    KeyTruncated(usize),

    #[error("key checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    KeyChecksum { stored: u32, computed: u32 },

    #[error("bad key magic")]
    KeyMagic,

    #[error("unsupported key version {0}")]
    KeyVersion(u8),

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("round trip verification failed: {0}")]
    Verification(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, StegoError>;

impl StegoError {
    pub(crate) fn mismatch(left: (usize, usize), right: (usize, usize)) -> Self {
        StegoError::DimensionMismatch {
            left_w: left.0,
            left_h: left.1,
            right_w: right.0,
            right_h: right.1,
        }
    }
}
