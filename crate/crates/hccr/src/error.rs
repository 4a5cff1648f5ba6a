use std::io;
use std::path::Path;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("{context}: byte {offset}: {detail}")]
    Format {
        context: String,
        offset: usize,
        detail: String,
    },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] hccr_core::Error),
}

impl Error {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn format(context: &str, offset: usize, detail: impl Into<String>) -> Self {
        Error::Format {
            context: context.to_string(),
            offset,
            detail: detail.into(),
        }
    }

    /// Replaces the context of a format error with a file path.
    pub(crate) fn at_path(self, path: &Path) -> Self {
        match self {
            Error::Format { offset, detail, .. } => Error::Format {
                context: path.display().to_string(),
                offset,
                detail,
            },
            other => other,
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
