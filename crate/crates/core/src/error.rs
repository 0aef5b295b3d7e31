use thiserror::Error;

/// Errors surfaced by the prognostics core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("history too short: need {needed} samples, got {got}")]
    HistoryTooShort { needed: usize, got: usize },
    #[error("reference value is zero")]
    ZeroReference,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model has no rules")]
    EmptyModel,
    #[error("non-finite input")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("exponential fit diverged (best c = {best:?})")]
    FitDiverged { best: [f64; 4] },
    #[error("lag order {lags} outside the supported range")]
    InvalidLags { lags: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
