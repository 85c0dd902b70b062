use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed occupation vector {occupation:?} for {modes} modes")]
    InvalidOccupation { occupation: Vec<u8>, modes: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("duplicate mode label {0}")]
    DuplicateMode(String),

    #[error("mode {0} is not part of the mode set")]
    ModeNotFound(String),

    #[error("states live on different mode sets")]
    ModeSetMismatch,

    #[error("matrix dimension {rows}x{cols} does not match {modes} mode labels")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        modes: usize,
    },

    #[error("element has gain: largest singular value {0}")]
    Gain(f64),

    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("signal and ancilla must occupy distinct arms")]
    SameArm,

    #[error("postselection has zero probability")]
    DegenerateOutcome,

    #[error("splitter with R_V = {0} is too close to balanced to implement the cloner")]
    SingularSplitter(f64),

    #[error("asymmetry q = {0} requires an infinite transmittance ratio")]
    InfiniteRatio(f64),

    #[error("transmittance ratio {target} is below the achievable minimum {minimum}")]
    InfeasibleRatio { target: f64, minimum: f64 },

    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
