use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller supplied a value outside an operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Protocol or generator parameters violate a precondition; nothing was run.
    #[error("configuration error: {0}")]
    Config(String),
    /// A protocol run or trusted evaluation failed part-way.
    #[error("execution error: {0}")]
    Execution(String),
    /// No candidate met a calibration target.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// Malformed text or wire input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn execution(msg: impl Into<String>) -> Error {
    Error::Execution(msg.into())
}

pub(crate) fn infeasible(msg: impl Into<String>) -> Error {
    Error::Infeasible(msg.into())
}

pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}
