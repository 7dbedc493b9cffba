use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The requested relative accuracy could not be certified. `value` is the
    /// best available approximation, returned so that callers can decide to
    /// accept a flagged result.
    #[error(
        "precision exhausted at {bits} bits: estimated relative error {rel_error:.3e} exceeds target {target:.3e}"
    )]
    PrecisionExhausted {
        bits: u32,
        rel_error: f64,
        target: f64,
        value: f64,
    },

    #[error("enumeration refused: {0}")]
    ComplexityRefused(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("the observed partition has probability zero under the model")]
    ZeroProbabilityData,

    #[error("no closed form: {0}")]
    NoClosedForm(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
