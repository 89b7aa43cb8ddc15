use thiserror::Error;

/// Errors produced anywhere in the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: left is {left}, right is {right}")]
    Shape { op: &'static str, left: String, right: String },

    #[error("unsupported dimension n={n}: {reason}")]
    UnsupportedDimension { n: usize, reason: &'static str },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("path `{word}` is not composable: {msg}")]
    Composability { word: String, msg: String },

    #[error("expression mixes endpoints: {0}")]
    MixedEndpoints(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("corestriction failed for {what}: image leaves the target subspace (witness column {witness})")]
    Corestriction { what: String, witness: usize },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
