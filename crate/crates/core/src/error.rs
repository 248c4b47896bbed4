use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("local volatility vanishes at spot {spot}; market price of risk is singular")]
    Singularity { spot: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    /// The two tracking contracts have (numerically) equal times to maturity.
    #[error("degenerate contract pair: {0}")]
    DegeneratePair(String),

    #[error("division by zero price at position {index}")]
    ZeroPrice { index: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("rank-deficient least-squares system; dependent columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("unidentifiable calibration: {0}")]
    Unidentifiable(String),

    #[error("data gap on day {day}: {detail}")]
    DataGap { day: usize, detail: String },

    #[error("day {day} outside roll cycle of length {cycle_length}")]
    OutsideCycle { day: usize, cycle_length: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("too many incomplete days: dropped {dropped} of {total}")]
    TooManyDropped { dropped: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
        Error::Parse {
            line,
            message: e.to_string(),
        }
    }
}
