use std::path::PathBuf;

/// Error type shared by the whole pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file failed to parse; `line` is 1-based (0 when no line applies).
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// An annotation violated an invariant; names the image and field.
    #[error("annotation for image `{image}`: {message}")]
    InvalidAnnotation { image: String, message: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    /// Bad argument or violated precondition.
    #[error("{0}")]
    InvalidInput(String),

    #[error("model: {0}")]
    Model(String),

    #[error("training: {0}")]
    Train(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn annotation(image: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidAnnotation {
            image: image.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
