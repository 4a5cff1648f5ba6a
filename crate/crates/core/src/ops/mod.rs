//! Forward and backward numerical kernels.
//!
//! All kernels are pure: they read their inputs and return fresh tensors.

mod activation;
mod concat;
mod conv;
mod dense;
mod pool;
mod softmax;

pub use activation::{dropout, dropout_backward, relu, relu_backward};
pub use concat::{concat_channels, split_channels};
pub use conv::{conv2d, conv2d_backward, output_extent, ConvGrads, ConvParams};
pub use dense::{fully_connected, fully_connected_backward, DenseGrads};
pub use pool::{
    global_avg_pool, global_avg_pool_backward, maxpool2d, maxpool2d_backward, PoolParams,
};
pub use softmax::{cross_entropy, softmax, softmax_cross_entropy_grad};

/// Whether stochastic layers are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}
