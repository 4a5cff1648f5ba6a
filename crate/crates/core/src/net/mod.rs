//! Network descriptions, parameters, execution and persistence.

mod builders;
pub mod codec;
mod forward;
mod gradcheck;
mod params;
mod spec;

pub use builders::{build_hccr_alexnet, build_hccr_googlenet, AlexNetConfig, ConvStage, GoogLeNetConfig, Head};
pub use codec::{decode_model, encode_model, serialized_size_report, Model, Pipeline, SizeReport};
pub use forward::{forward_net, predict, record_forward};
pub use gradcheck::{analytic_gradients, grad_check, grad_check_against, GradCheckConfig, GradCheckReport};
pub use params::{init_weights, ParamEntry, ParamStore};
pub use spec::{ActShape, DepthConvention, InceptionSpec, InputShape, Layer, NetworkSpec, ParamShape};
