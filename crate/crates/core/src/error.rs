use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {actual}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not square: {rows} entries for dim {dim}")]
    NotSquare { rows: usize, dim: usize },

    #[error("state has {amplitudes} amplitudes but {labels} basis labels")]
    LabelCount { amplitudes: usize, labels: usize },

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gate index {0} out of range (expected 1..=4)")]
    GateIndex(usize),

    #[error("unknown marked state {0:?} (expected one of 00, 01, 10, 11)")]
    MarkedLabel(String),

    #[error("state lies entirely outside the code space (logical population {0:e})")]
    OutsideCodeSpace(f64),

    #[error("identity check failed for {name}: max deviation {deviation:e} exceeds {tolerance:e}")]
    Identity {
        name: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("wrong noise channel kind: {0}")]
    ChannelKind(String),
}

pub type Result<T> = std::result::Result<T, Error>;
