use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: no tick rows")]
    EmptyInput,

    #[error("malformed row {row} (line {line}): {reason}")]
    MalformedRow { row: u64, line: u64, reason: String },

    #[error("non-monotonic timestamp at row {row} (line {line}): {timestamp} < {previous}")]
    NonMonotonic { row: u64, line: u64, timestamp: f64, previous: f64 },

    #[error("invalid tick: {0}")]
    InvalidTick(String),

    #[error("series too short: {len} ticks, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),

    #[error("sampling interval must be positive and finite, got {0}")]
    InvalidInterval(f64),

    #[error("sampling interval {dt} s exceeds series span {span} s")]
    IntervalExceedsSpan { dt: f64, span: f64 },

    #[error("too few samples: {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("non-positive value reached the log-log fitter at point {index}: ({x}, {y})")]
    NonPositive { index: usize, x: f64, y: f64 },

    #[error("rank-deficient design: all abscissae are equal")]
    RankDeficient,

    #[error("exponent is zero; scale identity undefined")]
    ZeroExponent,

    #[error("unknown law `{0}`")]
    UnknownLaw(String),

    #[error("unknown table `{0}`")]
    UnknownTable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
