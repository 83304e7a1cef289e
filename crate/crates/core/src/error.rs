use thiserror::Error;

/// Errors raised across the toolkit. Each variant maps to one failure class
/// so that front ends can translate them into exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("not available: {0}")]
    NotAvailable(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("branch cut: {0}")]
    BranchCut(String),
    #[error("arity mismatch: expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular operator: {0}")]
    Singular(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::BranchCut(_) | Error::Singular(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
