use thiserror::Error;

/// Errors produced by grid construction, operator application, evolution and
/// file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user-supplied data failed (sizes, ranges, missing
    /// keys). These map to exit code 1 in the CLI.
    #[error("validation: {0}")]
    Validation(String),

    /// Two objects that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A numerical failure at runtime (NaN, collapsed trace). These map to
    /// exit code 2 in the CLI.
    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: String, detail: String },

    /// Binary snapshot format violations.
    #[error("snapshot format: {0}")]
    Format(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context: context.into(),
            detail: detail.into(),
        }
    }
}
