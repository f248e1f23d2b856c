use crate::modes::Mode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resonant frequency: ω·ν = 0 at ν = {0}")]
    Resonance(Mode),
    #[error("truncation: {0}")]
    Truncation(String),
    #[error("resource cap exceeded: {what} (limit {limit})")]
    Resource { what: String, limit: u64 },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("singular evaluation: {0}")]
    Singular(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
