use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(u8, u8),
    #[error("letter {letter} out of range for alphabet {alphabet}")]
    LetterOutOfRange { letter: u8, alphabet: u8 },
    #[error("{0} is not strictly below {1}")]
    NotStrictlyBelow(String, String),
    #[error("malformed literal `{0}`: {1}")]
    Malformed(String, String),
    #[error("invalid type: {0}")]
    InvalidType(String),
    #[error("invalid e-family: {0}")]
    InvalidEFamily(String),
    #[error("not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("scale limit exceeded: {0}")]
    ScaleLimit(String),
    #[error("node {0} outside the embedding domain")]
    OutOfDomain(String),
    #[error("unstable action: {0}")]
    Unstable(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("layer mismatch")]
    LayerMismatch,
    #[error("invalid gap: {0}")]
    InvalidGap(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
