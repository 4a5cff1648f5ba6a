//! File formats, dataset directories and the `hccr` command line.
//!
//! The numerical work lives in [`hccr_core`]; this crate moves bytes in and
//! out of it: PGM images, GNT sample containers, raw tensor dumps and model
//! files.

pub mod cli;
pub mod dirs;
pub mod dtns;
mod error;
pub mod gnt;
pub mod model_file;
pub mod pgm;

pub use error::{Error, Result};
