use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input; maps to exit code 2.
    #[error("{0}")]
    InvalidInput(String),
    /// A numerical precondition does not hold; maps to exit code 3.
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    /// File contents do not parse; reported with I/O failures.
    #[error("{0}")]
    Format(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "config",
            Error::Numerical(_) => "numerical",
            Error::Io(_) => "io",
            Error::Format(_) => "format",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::Numerical(_) => 3,
            Error::Io(_) | Error::Format(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
