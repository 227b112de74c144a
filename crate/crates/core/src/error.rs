use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Decode { line: usize, msg: String },
    #[error("illegal instruction: {0}")]
    Illegal(String),
    #[error("layout: {0}")]
    Layout(String),
    #[error("config: {0}")]
    Config(String),
    #[error("oracle divergence: {0}")]
    Divergence(String),
    #[error("watchdog: no forward progress after {0} cycles")]
    Deadlock(u64),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn illegal(msg: impl Into<String>) -> Self {
        Error::Illegal(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
