use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("grid function does not match mesh: {0}")]
    Alignment(String),

    #[error("mesh configuration: {0}")]
    Configuration(String),

    #[error("reconstruction failed on cell {cell}: {reason}")]
    Reconstruction { cell: usize, reason: String },

    #[error("assembly: {0}")]
    Assembly(String),

    #[error("singular implicit system (pivot {pivot})")]
    Singular { pivot: usize },

    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    #[error("{test} at level {level}: {source}")]
    Run {
        test: String,
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
