use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Input problems (bad dimensions, malformed scenarios, violated
/// preconditions) are kept apart from numerical failures so the CLI can map
/// them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("group too large or infinite: more than {max_order} elements")]
    GroupTooLarge { max_order: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown scenario kind `{kind}` (valid kinds: {valid})")]
    UnknownKind { kind: String, valid: String },

    #[error("missing scenario parameter `{0}`")]
    MissingParam(String),

    #[error("unknown built-in scenario `{0}`")]
    UnknownBuiltin(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
