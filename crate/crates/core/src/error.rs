use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum IcrtError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("explicit weights are not sorted non-increasing (index {index})")]
    UnsortedWeights { index: usize },

    #[error("explicit weights are not normalizable: sum of squares is {sum_squares}")]
    NotNormalized { sum_squares: f64 },

    #[error("negative length {0}")]
    NegativeLength(f64),

    #[error("length {requested} lies beyond the sampled horizon {horizon}")]
    BeyondHorizon { requested: f64, horizon: f64 },

    #[error("the measure is identically zero; no cut can ever be placed")]
    EmptyMeasure,

    #[error("root search failed to bracket mass {mass} after {iterations} iterations")]
    RootNotBracketed { mass: f64, iterations: usize },

    #[error("cut sequence violates its invariants at index {index}: {reason}")]
    InvalidCuts { index: usize, reason: String },

    #[error("coordinate {coordinate} lies outside the tree range [0, {max}]")]
    OutOfRange { coordinate: f64, max: f64 },

    #[error("not enough usable grid points for a regression ({0} < 3)")]
    TooFewPoints(usize),

    #[error("hypothesis of the check does not hold: {0}")]
    HypothesisFailed(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed artifact {path}: {reason}")]
    Artifact { path: String, reason: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, IcrtError>;
