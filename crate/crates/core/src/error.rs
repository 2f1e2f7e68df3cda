use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("element {id} is out of range for a ground set of size {n}")]
    ElementOutOfRange { id: usize, n: usize },

    /// The value oracle does not satisfy the documented contract (e.g. `f(∅) ≠ 0`).
    #[error("oracle contract violated: {0}")]
    Contract(String),

    /// An internal invariant failed. Indicates a bug or severe numerical breakdown.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
