//! Samples, datasets, character preprocessing and the synthetic glyph source.

mod dataset;
mod preprocess;
mod synth;

pub use dataset::{shuffle_split, Dataset, Sample, Split};
pub use preprocess::{center_pad, invert_gray, preprocess, resize_bilinear, PreprocSpec};
pub use synth::{synth_glyphs, GLYPH_SIZE, REPERTOIRE};
