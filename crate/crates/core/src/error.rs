use thiserror::Error;

/// Errors raised by path construction, metrics, generators and the experiment runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NonMonotoneTimes: breakpoint {index} ({time}) does not exceed its predecessor")]
    NonMonotoneTimes { index: usize, time: f64 },
    #[error("DimensionMismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("NonFiniteValue: segment {segment} holds a non-finite entry")]
    NonFiniteValue { segment: usize },
    #[error("HorizonExceeded: time {time} lies beyond horizon {horizon}")]
    HorizonExceeded { time: f64, horizon: f64 },
    #[error("OutOfHorizon: t = {t} not in [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },
    #[error("RefinementTooSmall: requested {requested}, need at least {needed}")]
    RefinementTooSmall { requested: usize, needed: usize },
    #[error("BadParameter: {0}")]
    BadParameter(String),
    #[error("UnknownId: {0}")]
    UnknownId(String),
    #[error("NotUncorrelated: decomposition requires c_j = 0 for j >= 1")]
    NotUncorrelated,
    #[error("MissingInternals: {0}")]
    MissingInternals(String),
    #[error("InvalidRep: {0}")]
    InvalidRep(String),
    #[error("UnknownConstruction: {0}")]
    UnknownConstruction(String),
    #[error("SinkError: {0}")]
    SinkError(String),
    #[error("InsufficientData: need at least {needed} points, found {found}")]
    InsufficientData { needed: usize, found: usize },
}

impl Error {
    /// Short machine-readable kind, e.g. `"NonMonotoneTimes"`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonMonotoneTimes { .. } => "NonMonotoneTimes",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::HorizonExceeded { .. } => "HorizonExceeded",
            Error::OutOfHorizon { .. } => "OutOfHorizon",
            Error::RefinementTooSmall { .. } => "RefinementTooSmall",
            Error::BadParameter(_) => "BadParameter",
            Error::UnknownId(_) => "UnknownId",
            Error::NotUncorrelated => "NotUncorrelated",
            Error::MissingInternals(_) => "MissingInternals",
            Error::InvalidRep(_) => "InvalidRep",
            Error::UnknownConstruction(_) => "UnknownConstruction",
            Error::SinkError(_) => "SinkError",
            Error::InsufficientData { .. } => "InsufficientData",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn bad(msg: impl Into<String>) -> Error {
    Error::BadParameter(msg.into())
}
