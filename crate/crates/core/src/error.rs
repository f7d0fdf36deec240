use thiserror::Error;

use crate::grid::GridCoord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("facility count {k} out of range 1..={blocks}")]
    FacilityCountOutOfRange { k: usize, blocks: usize },

    #[error("coordinate {coord} lies outside a {width}x{height} grid")]
    OffGrid {
        coord: GridCoord,
        width: u32,
        height: u32,
    },

    #[error("customer {customer} stamped t={arrival} but the clock reads {clock}")]
    ClockMismatch {
        customer: u32,
        arrival: u32,
        clock: u32,
    },

    #[error("infeasible dispatch for customer {customer}: {reason}")]
    InfeasibleDispatch { customer: u32, reason: String },

    #[error("big-M value {big_m} must exceed {required}")]
    BigMTooSmall { big_m: i64, required: i64 },

    #[error("malformed event log: {0}")]
    MalformedLog(String),

    #[error("instance exceeds oracle bounds: {0}")]
    OracleBounds(String),

    #[error("LP parse error at line {line}: {message}")]
    LpParse { line: usize, message: String },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
