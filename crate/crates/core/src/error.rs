use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("language detection needs at least two profiles, got {0}")]
    TooFewProfiles(usize),

    #[error("bead shape {0}-{1} is not supported by the cost model")]
    UnsupportedShape(usize, usize),

    #[error("brute-force alignment is limited to 8x8 sentences, got {0}x{1}")]
    SizeBound(usize, usize),

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("extraction failed for {}: {msg}", path.display())]
    Extract { path: PathBuf, msg: String },

    #[error("no documents found in {}", .0.display())]
    NoDocuments(PathBuf),

    #[error("no document pairs were accepted")]
    NoPairs,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
