use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Stacks `[N,C_i,H,W]` inputs along the channel axis in argument order.
pub fn concat_channels<T: Scalar>(inputs: &[&Tensor<T>]) -> Result<Tensor<T>> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::invalid("concat of zero tensors"))?;
    let (n, _, h, w) = first.dims4("concat_channels")?;
    let mut channels = Vec::with_capacity(inputs.len());
    for t in inputs {
        let (tn, tc, th, tw) = t.dims4("concat_channels")?;
        if (tn, th, tw) != (n, h, w) {
            let shapes: Vec<_> = inputs.iter().map(|t| t.shape().to_vec()).collect();
            return Err(Error::shape(
                "concat_channels",
                format!("inputs disagree on N, H or W: {:?}", shapes),
            ));
        }
        channels.push(tc);
    }
    let total: usize = channels.iter().sum();
    let plane = h * w;
    let mut data = Vec::with_capacity(n * total * plane);
    for s in 0..n {
        for (t, &c) in inputs.iter().zip(&channels) {
            data.extend_from_slice(&t.data()[s * c * plane..(s + 1) * c * plane]);
        }
    }
    Tensor::new([n, total, h, w], data)
}

/// Inverse of [`concat_channels`]: cuts a gradient at the same channel boundaries.
pub fn split_channels<T: Scalar>(grad: &Tensor<T>, channels: &[usize]) -> Result<Vec<Tensor<T>>> {
    let (n, c, h, w) = grad.dims4("split_channels")?;
    if channels.iter().sum::<usize>() != c {
        return Err(Error::shape(
            "split_channels",
            format!("{:?} does not partition {} channels", channels, c),
        ));
    }
    let plane = h * w;
    let mut parts: Vec<Vec<T>> = channels.iter().map(|&ci| Vec::with_capacity(n * ci * plane)).collect();
    for s in 0..n {
        let mut offset = s * c * plane;
        for (part, &ci) in parts.iter_mut().zip(channels) {
            part.extend_from_slice(&grad.data()[offset..offset + ci * plane]);
            offset += ci * plane;
        }
    }
    parts
        .into_iter()
        .zip(channels)
        .map(|(d, &ci)| Tensor::new([n, ci, h, w], d))
        .collect()
}
