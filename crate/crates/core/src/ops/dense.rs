use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// `input · weightsᵀ + bias` for `input` `[N,D]` and `weights` `[T,D]`.
pub fn fully_connected<T: Scalar>(input: &Tensor<T>, weights: &Tensor<T>, bias: &[T]) -> Result<Tensor<T>> {
    let (n, d) = input.dims2("fully_connected")?;
    let (t, wd) = weights.dims2("fully_connected")?;
    if wd != d || bias.len() != t {
        return Err(Error::shape(
            "fully_connected",
            format!(
                "input {:?}, weights {:?}, bias {}",
                input.shape(),
                weights.shape(),
                bias.len()
            ),
        ));
    }
    let w = weights.data();
    let mut out = Vec::with_capacity(n * t);
    for x in input.data().chunks(d) {
        for (ti, wrow) in w.chunks(d).enumerate() {
            let mut acc = T::zero();
            for (&a, &b) in x.iter().zip(wrow) {
                acc += a * b;
            }
            out.push(acc + bias[ti]);
        }
    }
    Tensor::new([n, t], out)
}

#[derive(Debug, Clone)]
pub struct DenseGrads<T: Scalar> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Vec<T>,
}

pub fn fully_connected_backward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<DenseGrads<T>> {
    let (n, d) = input.dims2("fully_connected backward")?;
    let (t, _) = weights.dims2("fully_connected backward")?;
    if grad_out.shape() != [n, t] {
        return Err(Error::shape(
            "fully_connected backward",
            format!("upstream {:?}, expected [{}, {}]", grad_out.shape(), n, t),
        ));
    }
    let w = weights.data();
    let x = input.data();
    let mut gx = vec![T::zero(); n * d];
    let mut gw = vec![T::zero(); t * d];
    let mut gb = vec![T::zero(); t];
    for s in 0..n {
        let xrow = &x[s * d..(s + 1) * d];
        let gxrow = &mut gx[s * d..(s + 1) * d];
        for ti in 0..t {
            let g = grad_out.data()[s * t + ti];
            gb[ti] += g;
            let wrow = &w[ti * d..(ti + 1) * d];
            let gwrow = &mut gw[ti * d..(ti + 1) * d];
            for k in 0..d {
                gxrow[k] += g * wrow[k];
                gwrow[k] += g * xrow[k];
            }
        }
    }
    Ok(DenseGrads {
        input: Tensor::new([n, d], gx)?,
        weights: Tensor::new([t, d], gw)?,
        bias: gb,
    })
}
