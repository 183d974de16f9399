//! Error and result types shared across the crate.

/// Crate-wide error type.
///
/// `Parameter` and `Precondition` indicate caller mistakes (CLI exit code 2);
/// everything else is a runtime failure (CLI exit code 1).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A supplied argument violates an operation's contract.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The supplied basis does not satisfy a scheme's precondition.
    #[error("scheme {scheme} precondition failed: {reason}")]
    Precondition { scheme: &'static str, reason: String },

    /// Malformed input data (matrix text, PBM/PGM, manifest, fixture).
    #[error("parse error: {0}")]
    Parse(String),

    /// A reconstruction is missing a required share.
    #[error("missing share: participant {participant}, run {run}")]
    MissingShare { participant: usize, run: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A verification assertion did not hold.
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Process exit code class: 2 for usage errors, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Precondition { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
