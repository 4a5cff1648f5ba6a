//! Reverse-mode differentiation over a recorded forward pass.
//!
//! A [`Tape`] owns every intermediate tensor of one forward pass together
//! with the auxiliaries its backward rules need (pooling argmax indices,
//! dropout masks, concat boundaries). It borrows the parameter store, so
//! parameters cannot change between the forward pass and its replay.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::net::ParamStore;
use crate::ops::{self, ConvParams, Mode, PoolParams};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Handle to a tensor recorded on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ValueId(usize);

#[derive(Debug, Clone, PartialEq)]
enum Op<T> {
    Conv { param: usize, conv: ConvParams },
    Relu,
    MaxPool { argmax: Vec<usize> },
    GlobalAvgPool,
    Dropout { mask: Option<Vec<T>> },
    Concat { channels: Vec<usize> },
    Flatten,
    Dense { param: usize },
    Softmax,
    CrossEntropy { labels: Vec<usize> },
}

impl<T> Op<T> {
    fn name(&self) -> &'static str {
        match self {
            Op::Conv { .. } => "conv",
            Op::Relu => "relu",
            Op::MaxPool { .. } => "maxpool",
            Op::GlobalAvgPool => "global_avg_pool",
            Op::Dropout { .. } => "dropout",
            Op::Concat { .. } => "concat",
            Op::Flatten => "flatten",
            Op::Dense { .. } => "fully_connected",
            Op::Softmax => "softmax",
            Op::CrossEntropy { .. } => "cross_entropy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Record<T> {
    op: Op<T>,
    inputs: Vec<usize>,
    output: usize,
}

/// Gradient of one weighted layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad<T: Scalar> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Result of a backward replay: one gradient per parameter entry (zero when
/// the entry is off the differentiated path) and the gradients of the
/// tape's input values.
#[derive(Debug, Clone)]
pub struct Gradients<T: Scalar> {
    pub params: Vec<ParamGrad<T>>,
    values: Vec<Option<Tensor<T>>>,
}

impl<T: Scalar> Gradients<T> {
    /// Gradient with respect to a tape input, `None` when it does not reach the output.
    pub fn value(&self, id: ValueId) -> Option<&Tensor<T>> {
        self.values.get(id.0).and_then(Option::as_ref)
    }

    pub fn zeros_like(params: &ParamStore<T>) -> Self {
        Gradients {
            params: params
                .entries()
                .iter()
                .map(|e| ParamGrad {
                    weight: Tensor::zeros(e.weight.shape().to_vec()),
                    bias: Tensor::zeros(e.bias.shape().to_vec()),
                })
                .collect(),
            values: Vec::new(),
        }
    }
}

#[derive(Debug)]
pub struct Tape<'p, T: Scalar> {
    params: &'p ParamStore<T>,
    values: Vec<Tensor<T>>,
    producer: Vec<Option<usize>>,
    records: Vec<Record<T>>,
    consumed: bool,
}

impl<'p, T: Scalar> Tape<'p, T> {
    pub fn new(params: &'p ParamStore<T>) -> Self {
        Tape {
            params,
            values: Vec::new(),
            producer: Vec::new(),
            records: Vec::new(),
            consumed: false,
        }
    }

    pub fn input(&mut self, tensor: Tensor<T>) -> ValueId {
        self.values.push(tensor);
        self.producer.push(None);
        ValueId(self.values.len() - 1)
    }

    pub fn value(&self, id: ValueId) -> &Tensor<T> {
        &self.values[id.0]
    }

    /// Operation names in execution order.
    pub fn ops(&self) -> Vec<&'static str> {
        self.records.iter().map(|r| r.op.name()).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }

    fn push(&mut self, op: Op<T>, inputs: Vec<usize>, output: Tensor<T>) -> ValueId {
        let out = self.values.len();
        self.values.push(output);
        self.producer.push(Some(self.records.len()));
        self.records.push(Record {
            op,
            inputs,
            output: out,
        });
        ValueId(out)
    }

    fn param_entry(&self, param: usize) -> Result<&'p crate::net::ParamEntry<T>> {
        self.params
            .entries()
            .get(param)
            .ok_or_else(|| Error::invalid(format!("no parameter entry {}", param)))
    }

    pub fn conv(&mut self, x: ValueId, param: usize, conv: ConvParams) -> Result<ValueId> {
        let entry = self.param_entry(param)?;
        let y = ops::conv2d(&self.values[x.0], &entry.weight, entry.bias.data(), conv)?;
        Ok(self.push(Op::Conv { param, conv }, vec![x.0], y))
    }

    pub fn relu(&mut self, x: ValueId) -> Result<ValueId> {
        let y = ops::relu(&self.values[x.0]);
        Ok(self.push(Op::Relu, vec![x.0], y))
    }

    pub fn maxpool(&mut self, x: ValueId, pool: PoolParams) -> Result<ValueId> {
        let (y, argmax) = ops::maxpool2d(&self.values[x.0], pool)?;
        Ok(self.push(Op::MaxPool { argmax }, vec![x.0], y))
    }

    pub fn global_avg_pool(&mut self, x: ValueId) -> Result<ValueId> {
        let y = ops::global_avg_pool(&self.values[x.0])?;
        Ok(self.push(Op::GlobalAvgPool, vec![x.0], y))
    }

    pub fn dropout<R: Rng + ?Sized>(&mut self, x: ValueId, rate: f64, mode: Mode, rng: &mut R) -> Result<ValueId> {
        let (y, mask) = ops::dropout(&self.values[x.0], rate, mode, rng)?;
        Ok(self.push(Op::Dropout { mask }, vec![x.0], y))
    }

    pub fn concat(&mut self, xs: &[ValueId]) -> Result<ValueId> {
        let tensors: Vec<&Tensor<T>> = xs.iter().map(|x| &self.values[x.0]).collect();
        let y = ops::concat_channels(&tensors)?;
        let channels = tensors.iter().map(|t| t.shape()[1]).collect();
        Ok(self.push(Op::Concat { channels }, xs.iter().map(|x| x.0).collect(), y))
    }

    /// `[N, ...] -> [N, D]`.
    pub fn flatten(&mut self, x: ValueId) -> Result<ValueId> {
        let t = &self.values[x.0];
        let n = t.shape()[0];
        let y = t.clone().reshape([n, t.len() / n])?;
        Ok(self.push(Op::Flatten, vec![x.0], y))
    }

    pub fn dense(&mut self, x: ValueId, param: usize) -> Result<ValueId> {
        let entry = self.param_entry(param)?;
        let y = ops::fully_connected(&self.values[x.0], &entry.weight, entry.bias.data())?;
        Ok(self.push(Op::Dense { param }, vec![x.0], y))
    }

    pub fn softmax(&mut self, x: ValueId) -> Result<ValueId> {
        let y = ops::softmax(&self.values[x.0])?;
        Ok(self.push(Op::Softmax, vec![x.0], y))
    }

    /// Records the mean cross-entropy of `probs` against `labels` and returns its value.
    pub fn cross_entropy(&mut self, probs: ValueId, labels: &[usize]) -> Result<(ValueId, T)> {
        let loss = ops::cross_entropy(&self.values[probs.0], labels)?;
        let id = self.push(
            Op::CrossEntropy {
                labels: labels.to_vec(),
            },
            vec![probs.0],
            Tensor::full([1], loss),
        );
        Ok((id, loss))
    }

    /// Replays the tape from its last cross-entropy record, seeded with `loss_grad`.
    pub fn backward(&mut self, loss_grad: T) -> Result<Gradients<T>> {
        let loss = self
            .records
            .iter()
            .rev()
            .find(|r| matches!(r.op, Op::CrossEntropy { .. }))
            .map(|r| r.output)
            .ok_or(Error::NoLoss)?;
        self.backward_from(ValueId(loss), Tensor::full([1], loss_grad))
    }

    /// Replays the tape from an arbitrary recorded value. A tape can be replayed once.
    pub fn backward_from(&mut self, output: ValueId, upstream: Tensor<T>) -> Result<Gradients<T>> {
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        if upstream.shape() != self.values[output.0].shape() {
            return Err(Error::shape(
                "backward",
                format!(
                    "upstream {:?} for value {:?}",
                    upstream.shape(),
                    self.values[output.0].shape()
                ),
            ));
        }
        self.consumed = true;
        let mut grads = Gradients::zeros_like(self.params);
        let mut value_grads: Vec<Option<Tensor<T>>> = vec![None; self.values.len()];
        value_grads[output.0] = Some(upstream);

        for record in self.records.iter().rev() {
            let Some(gy) = value_grads[record.output].take() else {
                continue;
            };
            let x = record.inputs[0];
            match &record.op {
                Op::Conv { param, conv } => {
                    let entry = self.param_entry(*param)?;
                    let g = ops::conv2d_backward(&self.values[x], &entry.weight, &gy, *conv)?;
                    let pg = &mut grads.params[*param];
                    pg.weight.add_assign(&g.weights)?;
                    for (b, d) in pg.bias.data_mut().iter_mut().zip(&g.bias) {
                        *b += *d;
                    }
                    accumulate(&mut value_grads, x, g.input)?;
                }
                Op::Dense { param } => {
                    let entry = self.param_entry(*param)?;
                    let g = ops::fully_connected_backward(&self.values[x], &entry.weight, &gy)?;
                    let pg = &mut grads.params[*param];
                    pg.weight.add_assign(&g.weights)?;
                    for (b, d) in pg.bias.data_mut().iter_mut().zip(&g.bias) {
                        *b += *d;
                    }
                    accumulate(&mut value_grads, x, g.input)?;
                }
                Op::Relu => {
                    let gx = ops::relu_backward(&self.values[x], &gy)?;
                    accumulate(&mut value_grads, x, gx)?;
                }
                Op::MaxPool { argmax } => {
                    let gx = ops::maxpool2d_backward(self.values[x].shape(), argmax, &gy)?;
                    accumulate(&mut value_grads, x, gx)?;
                }
                Op::GlobalAvgPool => {
                    let gx = ops::global_avg_pool_backward(self.values[x].shape(), &gy)?;
                    accumulate(&mut value_grads, x, gx)?;
                }
                Op::Dropout { mask } => {
                    let gx = ops::dropout_backward(mask.as_deref(), &gy)?;
                    accumulate(&mut value_grads, x, gx)?;
                }
                Op::Concat { channels } => {
                    let parts = ops::split_channels(&gy, channels)?;
                    for (&input, part) in record.inputs.iter().zip(parts) {
                        accumulate(&mut value_grads, input, part)?;
                    }
                }
                Op::Flatten => {
                    let gx = gy.reshape(self.values[x].shape().to_vec())?;
                    accumulate(&mut value_grads, x, gx)?;
                }
                Op::Softmax => {
                    let p = &self.values[record.output];
                    let t = p.shape()[1];
                    let mut gx = gy;
                    for (grow, prow) in gx.data_mut().chunks_mut(t).zip(p.data().chunks(t)) {
                        let dot: T = grow.iter().zip(prow).map(|(&g, &p)| g * p).sum();
                        for (g, &p) in grow.iter_mut().zip(prow) {
                            *g = p * (*g - dot);
                        }
                    }
                    accumulate(&mut value_grads, x, gx)?;
                }
                Op::CrossEntropy { labels } => {
                    let seed = gy.data()[0];
                    let probs = &self.values[x];
                    let fused = self.producer[x]
                        .map(|r| &self.records[r])
                        .filter(|r| r.op == Op::Softmax);
                    match fused {
                        // Softmax directly feeds the loss: hand (p − onehot)/N to the logits.
                        Some(softmax) if value_grads[x].is_none() => {
                            let mut gz = ops::softmax_cross_entropy_grad(probs, labels)?;
                            for v in gz.data_mut() {
                                *v *= seed;
                            }
                            accumulate(&mut value_grads, softmax.inputs[0], gz)?;
                        }
                        _ => {
                            let (n, t) = probs.dims2("cross_entropy backward")?;
                            let floor = T::min_positive_value();
                            let mut gp = Tensor::zeros([n, t]);
                            let scale = seed / T::from_f64(n as f64);
                            for (i, &y) in labels.iter().enumerate() {
                                gp.data_mut()[i * t + y] = -scale / probs.data()[i * t + y].max(floor);
                            }
                            accumulate(&mut value_grads, x, gp)?;
                        }
                    }
                }
            }
        }
        grads.values = value_grads;
        Ok(grads)
    }
}

fn accumulate<T: Scalar>(slots: &mut [Option<Tensor<T>>], index: usize, grad: Tensor<T>) -> Result<()> {
    match &mut slots[index] {
        Some(existing) => existing.add_assign(&grad),
        slot @ None => {
            *slot = Some(grad);
            Ok(())
        }
    }
}
