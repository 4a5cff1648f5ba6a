//! Model files on disk.

use std::path::Path;

use hccr_core::net::{decode_model, encode_model, Model};

use crate::error::{read_file, write_file, Error, Result};

/// Writes the model and returns the number of bytes written.
pub fn save_model(path: &Path, model: &Model) -> Result<usize> {
    let bytes = encode_model(model)?;
    write_file(path, &bytes)?;
    Ok(bytes.len())
}

pub fn load_model(path: &Path) -> Result<Model> {
    let bytes = read_file(path)?;
    decode_model(&bytes).map_err(|e| match e {
        hccr_core::Error::Decode { offset, detail } => Error::Format {
            context: path.display().to_string(),
            offset,
            detail,
        },
        other => Error::Core(other),
    })
}
