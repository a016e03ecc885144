use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("index {index} is below the start index {start}")]
    BelowStart { index: u64, start: u64 },

    #[error("weight is not monotone: value at {index} is smaller than at {previous}")]
    NotMonotone { index: u64, previous: u64 },

    #[error("no valid start index found for weight `{0}`")]
    NoStartIndex(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("schedule is not strictly increasing at position {0}")]
    NotIncreasing(u64),

    #[error("schedule entry at position {0} overflows the integer range")]
    ScheduleOverflow(u64),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("symbolic class unavailable: {0}")]
    NumericOnly(&'static str),

    #[error("incompatible operands: {0}")]
    Incompatible(String),

    #[error("operator lacks a required property: {0}")]
    MissingFlag(&'static str),

    #[error("grid of {grid} points is too coarse; at least {required} are needed")]
    GridTooCoarse { grid: usize, required: u64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
