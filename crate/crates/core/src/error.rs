use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown group kind `{0}`")]
    UnknownKind(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown generator symbol `{0}`")]
    UnknownSymbol(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("operands belong to different groups")]
    OwnerMismatch,
    #[error("operands are over different fields")]
    FieldMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("window s = {window} is smaller than the support radius {radius}")]
    WindowTooSmall { window: usize, radius: usize },
    #[error("group `{0}` has no implemented quotients")]
    QuotientUnsupported(String),
    #[error("operation needs a nonempty set")]
    EmptySet,
    #[error("field {0} does not support this operation")]
    UnsupportedField(String),
    #[error("level {level}: no candidate within the retry budget satisfies {bound}")]
    Exhausted { level: usize, bound: String },
    #[error("level {0} is not present in the system")]
    MissingLevel(usize),
    #[error("weights do not match the level: {0}")]
    WeightMismatch(String),
    #[error("tiling failed: {0}")]
    TilingFailure(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    /// True for malformed input; false for well-formed input that violates an
    /// operation's precondition.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnknownKind(_) | Error::UnknownSymbol(_) | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
