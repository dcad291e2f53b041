use thiserror::Error;

/// Failure classes shared by every module. The CLI maps them onto exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KafError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unsupported: {0}")]
    Capability(String),
}

pub type Result<T> = std::result::Result<T, KafError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(KafError::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(KafError::Usage(msg.into()))
}

pub(crate) fn capability<T>(msg: impl Into<String>) -> Result<T> {
    Err(KafError::Capability(msg.into()))
}
