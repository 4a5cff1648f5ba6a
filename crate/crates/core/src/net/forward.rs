use alloc::format;

use rand::Rng;

use super::params::ParamStore;
use super::spec::{InceptionSpec, Layer, NetworkSpec};
use crate::error::{Error, Result};
use crate::ops::{ConvParams, Mode};
use crate::scalar::Scalar;
use crate::tape::{Tape, ValueId};
use crate::tensor::Tensor;

/// Records the network's forward pass from the tape value `input` and
/// returns the softmax output.
pub fn record_forward<T: Scalar, R: Rng + ?Sized>(
    spec: &NetworkSpec,
    tape: &mut Tape<'_, T>,
    input: ValueId,
    mode: Mode,
    rng: &mut R,
) -> Result<ValueId> {
    let x = tape.value(input);
    let (_, c, h, w) = x.dims4("forward")?;
    let expected = spec.input();
    if (c, h, w) != (expected.channels, expected.height, expected.width) {
        return Err(Error::shape(
            "forward",
            format!("input {:?} does not match network input {:?}", x.shape(), expected),
        ));
    }
    let mut cur = input;
    let mut param = 0;
    for (index, layer) in spec.layers().iter().enumerate() {
        let step = |tape: &mut Tape<'_, T>, param: &mut usize, rng: &mut R| -> Result<ValueId> {
            match *layer {
                Layer::Conv {
                    stride, padding, ..
                } => {
                    *param += 1;
                    tape.conv(cur, *param - 1, ConvParams::new(stride, padding))
                }
                Layer::Relu => tape.relu(cur),
                Layer::MaxPool(pool) => tape.maxpool(cur, pool),
                Layer::GlobalAvgPool => tape.global_avg_pool(cur),
                Layer::Dropout { rate } => tape.dropout(cur, rate as f64, mode, rng),
                Layer::Inception(_) => {
                    let out = inception(tape, cur, *param);
                    *param += 6;
                    out
                }
                Layer::Flatten => tape.flatten(cur),
                Layer::FullyConnected { .. } => {
                    *param += 1;
                    tape.dense(cur, *param - 1)
                }
                Layer::Softmax => tape.softmax(cur),
            }
        };
        cur = step(tape, &mut param, rng).map_err(|e| e.in_layer(index, layer.kind()))?;
    }
    Ok(cur)
}

fn inception<T: Scalar>(tape: &mut Tape<'_, T>, x: ValueId, first: usize) -> Result<ValueId> {
    let conv_relu = |tape: &mut Tape<'_, T>, x, param, kernel: usize| -> Result<ValueId> {
        let y = tape.conv(x, param, ConvParams::same(kernel))?;
        tape.relu(y)
    };
    let b1 = conv_relu(tape, x, first, 1)?;
    let r3 = conv_relu(tape, x, first + 1, 1)?;
    let b3 = conv_relu(tape, r3, first + 2, 3)?;
    let r5 = conv_relu(tape, x, first + 3, 1)?;
    let b5 = conv_relu(tape, r5, first + 4, 5)?;
    let pooled = tape.maxpool(x, InceptionSpec::POOL)?;
    let bp = conv_relu(tape, pooled, first + 5, 1)?;
    tape.concat(&[b1, b3, b5, bp])
}

/// Runs the network on an `[N,C,H,W]` batch and returns `N×T` class
/// probabilities. The tape is returned in train mode only.
pub fn forward_net<'p, T: Scalar, R: Rng + ?Sized>(
    spec: &NetworkSpec,
    params: &'p ParamStore<T>,
    input: Tensor<T>,
    mode: Mode,
    rng: &mut R,
) -> Result<(Tensor<T>, Option<Tape<'p, T>>)> {
    params.check_layout(spec)?;
    let mut tape = Tape::new(params);
    let x = tape.input(input);
    let out = record_forward(spec, &mut tape, x, mode, rng)?;
    let probs = tape.value(out).clone();
    Ok((probs, (mode == Mode::Train).then_some(tape)))
}

/// Inference-mode forward pass; dropout is inactive so no randomness is drawn.
pub fn predict<T: Scalar>(spec: &NetworkSpec, params: &ParamStore<T>, input: Tensor<T>) -> Result<Tensor<T>> {
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    forward_net(spec, params, input, Mode::Infer, &mut rng).map(|(p, _)| p)
}
