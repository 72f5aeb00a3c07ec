use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("word must be non-empty")]
    EmptyWord,
    #[error("partial quotients must be positive")]
    ZeroDigit,
    #[error("invalid word text {0:?}")]
    WordSyntax(String),
    #[error("invalid rational text {0:?}")]
    RationalSyntax(String),
    #[error("expected 0 < num < den, got {num}/{den}")]
    RationalOutOfRange { num: String, den: String },
    #[error("partial quotient does not fit in 64 bits")]
    DigitOverflow,
    #[error("last partial quotient must be at least 2")]
    LastDigitOne,
    #[error("log-rational argument must be at least 1, got {0}")]
    NegativeMeasure(String),
    #[error("pattern must be non-empty")]
    EmptyPattern,
    #[error("period must be non-empty")]
    EmptyPeriod,
    #[error("offset {offset} out of range for stride {stride} and pattern length {len}")]
    OffsetOutOfRange { stride: u64, offset: u64, len: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid decimal {0:?}")]
    DecimalSyntax(String),
    #[error("decimal {0} is outside (0, 1)")]
    DecimalOutOfRange(String),
    #[error("invalid source spec {0:?}")]
    SourceSpec(String),
    #[error("enumeration of {count} items exceeds the ceiling of {ceiling}")]
    ResourceCeiling { count: String, ceiling: u64 },
    /// An exact check disagreed with a proved identity or inequality.
    #[error("contradiction: {0}")]
    Contradiction(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
