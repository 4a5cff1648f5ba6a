//! Allocation-only engine for offline handwritten character recognition.
//!
//! The crate is `no_std` (it needs `alloc` only) and holds every numerical
//! piece of the toolkit:
//!
//! * [`tensor`], [`ops`] and [`tape`]: dense f32/f64 tensors, the forward and
//!   backward kernels (convolution, max pooling, ReLU, dropout, channel
//!   concatenation, fully-connected, softmax with cross-entropy) and a
//!   reverse-mode tape that replays them.
//! * [`net`]: layer descriptors, the inception block, the GoogLeNet- and
//!   AlexNet-style topologies, parameter/depth accounting, initialization,
//!   network execution, gradient checking and the binary model codec.
//! * [`features`]: Gabor, chaincode-gradient and HoG direction planes and
//!   the input stacking modes.
//! * [`data`]: gray inversion, resizing, mask placement, the synthetic
//!   glyph generator and stratified splitting.
//! * [`train`]: minibatch SGD, Top-k evaluation, softmax-average ensembles
//!   and storage / error-rate arithmetic.
//!
//! File formats and the command line live in the `hccr` crate.

#![no_std]

extern crate alloc;

pub mod data;
pub mod error;
pub mod features;
pub mod image;
pub mod net;
pub mod ops;
pub mod optim;
pub mod scalar;
pub mod tape;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use image::GrayImage;
pub use scalar::Scalar;
pub use tensor::Tensor;
