use crate::property::Witness;

/// Unified error type for every fallible operation in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter was outside an operation's documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The request was valid but exceeds a documented size or work cap.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A mathematical precondition failed. Carries the violating
    /// configuration when one exists.
    #[error("precondition failed: {message}")]
    Precondition {
        message: String,
        witness: Option<Witness>,
    },

    /// Malformed input file or unparseable value.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A guaranteed-unreachable state was reached; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for bad input, 3 for exceeded
    /// resource caps, 4 for failed mathematical preconditions, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) => 2,
            Error::ResourceLimit(_) => 3,
            Error::Precondition { .. } => 4,
            Error::Internal(_) => 1,
        }
    }
}
