use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the error kinds the CLI reports in its
/// machine-readable error JSON (see [`Error::kind`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("dimension mismatch: expected {expected} points, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("infeasible fairness constraint: {0}")]
    Infeasible(String),

    #[error("inconsistent stream: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable identifier for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Malformed(_) => "malformed",
            Error::Dimension { .. } => "dimension",
            Error::Argument(_) => "argument",
            Error::Capability(_) => "capability",
            Error::Infeasible(_) => "infeasible",
            Error::Inconsistent(_) => "inconsistent",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
