use thiserror::Error;

/// Errors raised across the laboratory.
///
/// `CapExceeded` is kept separate from the other input errors so callers
/// (the CLI in particular) can tell a resource refusal from a malformed request.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),

    #[error("qubit index {index} out of range for {qubits} qubits")]
    QubitOutOfRange { index: usize, qubits: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("decode error at bit offset {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    #[error("numerical check failed: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn cap(msg: impl Into<String>) -> Self {
        Error::CapExceeded(msg.into())
    }

    pub(crate) fn decode(offset: usize, reason: impl Into<String>) -> Self {
        Error::Decode {
            offset,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
