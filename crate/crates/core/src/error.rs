use thiserror::Error;

use crate::model::{ObjectId, TimeInterval};

#[derive(Debug, Error)]
pub enum Error {
    #[error("block out of range: {block} (store has {allocated} blocks)")]
    BlockOutOfRange { block: u32, allocated: u32 },

    #[error("payload of {len} bytes exceeds page size {page_size}")]
    PayloadTooLarge { len: usize, page_size: usize },

    #[error("unknown object {0}")]
    UnknownObject(ObjectId),

    #[error("interval {interval} is outside the horizon {horizon}")]
    IntervalOutsideHorizon { interval: TimeInterval, horizon: TimeInterval },

    #[error("horizon mismatch: {0}")]
    HorizonMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("corrupt index: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
