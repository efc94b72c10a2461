use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar input fell outside the domain of the operation.
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("image has no pixels")]
    EmptyImage,

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        found: (u32, u32),
    },

    #[error("buffer of length {len} does not hold {width}x{height}x{channels} samples")]
    BufferLength {
        width: u32,
        height: u32,
        channels: usize,
        len: usize,
    },

    #[error("label {label} is out of range (max {max})")]
    LabelRange { label: u32, max: u32 },

    #[error("histogram has fewer than two occupied levels; no threshold separates it")]
    NoThreshold,

    #[error("k = {k} is invalid for {points} points")]
    InvalidK { k: usize, points: usize },

    #[error("metric undefined: no non-void pixels")]
    UndefinedMetric,

    #[error("prediction has {0} distinct labels; at most 8 are supported")]
    TooManyLabels(usize),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("encode error: {0}")]
    Encode(String),

    #[error("mask contains unexpected values {values:?} (allowed: 0, 1, 255)")]
    MaskFormat { values: Vec<u8> },

    #[error("labelmap PNG contains a color outside the palette: {0:?}")]
    UnknownColor([u8; 3]),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse angle {input:?}: {reason}")]
    AngleParse { input: String, reason: String },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }
}
