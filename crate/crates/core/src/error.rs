use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed demand spec: {0}")]
    Malformed(String),

    #[error("{field} must be a positive integer, got {value}")]
    NonPositive { field: &'static str, value: i64 },

    #[error("receiver {receiver} has an empty demand set")]
    EmptyDemand { receiver: usize },

    #[error(
        "index out of range: receiver {receiver} demands message {index}, valid range is 1..={k}"
    )]
    IndexOutOfRange {
        receiver: usize,
        index: i64,
        k: usize,
    },

    #[error("dimension mismatch: expected {expected} components, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid rational {0:?}")]
    InvalidRational(String),

    #[error("DoF component {index} is negative")]
    NegativeComponent { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex enumeration limited to K <= {limit}, instance has K = {k}")]
    EnumerationLimit { k: usize, limit: usize },

    #[error("point lies outside the DoF region; violated supports: {violated}")]
    OutsideRegion { violated: String },

    #[error(
        "column budget violated at receiver {receiver}: signal plus dominant interference needs {required} dimensions, only {available} available"
    )]
    ColumnBudget {
        receiver: usize,
        required: u128,
        available: u128,
    },

    #[error("time expansion {tau} exceeds the cap of {cap}")]
    TauCap { tau: u128, cap: u128 },

    #[error("stacked channel matrix singular after {attempts} seeds")]
    SingularChannel { attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse failure classes, one exit code each in the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    OutOfRegion,
    CapExceeded,
    Verification,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Io => 1,
            ErrorClass::Validation => 2,
            ErrorClass::OutOfRegion => 3,
            ErrorClass::CapExceeded => 4,
            ErrorClass::Verification => 5,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Malformed(_)
            | Error::NonPositive { .. }
            | Error::EmptyDemand { .. }
            | Error::IndexOutOfRange { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidRational(_)
            | Error::NegativeComponent { .. }
            | Error::InvalidParameter(_) => ErrorClass::Validation,
            Error::OutsideRegion { .. } | Error::ColumnBudget { .. } => ErrorClass::OutOfRegion,
            Error::EnumerationLimit { .. } | Error::TauCap { .. } => ErrorClass::CapExceeded,
            Error::SingularChannel { .. } => ErrorClass::Verification,
            Error::Io(_) => ErrorClass::Io,
        }
    }
}
