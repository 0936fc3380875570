use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("negative exponent at byte {offset}")]
    NegativeExponent { offset: usize },
    #[error("exponent at byte {offset} is not a non-negative integer")]
    NonIntegerExponent { offset: usize },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("polynomial degree {0} exceeds the limit of 64")]
    DegreeTooLarge(u32),
    #[error("point ({x}, {y}) is outside the domain of {what}")]
    Domain { what: &'static str, x: f64, y: f64 },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no crossing of the data line within {t_max} time units")]
    NoCrossing { t_max: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that stem from the numbers rather than from malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::NonFinite(_) | Error::NoCrossing { .. }
        )
    }
}
