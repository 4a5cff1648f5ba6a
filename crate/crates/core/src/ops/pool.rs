use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::conv::output_extent;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Square max-pooling window. Padded positions never win.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolParams {
    pub window: usize,
    pub stride: usize,
    pub padding: usize,
}

impl PoolParams {
    pub const fn new(window: usize, stride: usize, padding: usize) -> Self {
        PoolParams {
            window,
            stride,
            padding,
        }
    }

    pub fn output_extent(&self, input: usize) -> Option<usize> {
        if self.window == 0 || self.padding >= self.window {
            return None;
        }
        output_extent(input, self.window, self.stride, self.padding)
    }
}

/// Per-channel max pooling. Returns the pooled tensor and, for every output
/// element, the flat input index that produced it (first row-major maximum).
pub fn maxpool2d<T: Scalar>(input: &Tensor<T>, params: PoolParams) -> Result<(Tensor<T>, Vec<usize>)> {
    let (n, c, h, w) = input.dims4("maxpool2d")?;
    if params.window == 0 || params.stride == 0 {
        return Err(Error::invalid("maxpool2d window and stride must be positive"));
    }
    if params.padding >= params.window {
        return Err(Error::invalid(format!(
            "maxpool2d padding {} must be smaller than window {}",
            params.padding, params.window
        )));
    }
    let (Some(oh), Some(ow)) = (params.output_extent(h), params.output_extent(w)) else {
        return Err(Error::EmptyOutput {
            op: "maxpool2d",
            detail: format!(
                "window {} exceeds padded {}x{} input (padding {})",
                params.window, h, w, params.padding
            ),
        });
    };
    let x = input.data();
    let mut out = Vec::with_capacity(n * c * oh * ow);
    let mut argmax = Vec::with_capacity(n * c * oh * ow);
    let pad = params.padding as isize;
    for plane in 0..n * c {
        let base = plane * h * w;
        for oy in 0..oh {
            let y0 = (oy * params.stride) as isize - pad;
            let ys = y0.max(0) as usize..((y0 + params.window as isize).min(h as isize)) as usize;
            for ox in 0..ow {
                let x0 = (ox * params.stride) as isize - pad;
                let xs = x0.max(0) as usize..((x0 + params.window as isize).min(w as isize)) as usize;
                let mut best = base + ys.start * w + xs.start;
                for iy in ys.clone() {
                    for ix in xs.clone() {
                        let idx = base + iy * w + ix;
                        if x[idx] > x[best] {
                            best = idx;
                        }
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
    }
    Ok((Tensor::new([n, c, oh, ow], out)?, argmax))
}

/// Routes each upstream element to its saved argmax position.
pub fn maxpool2d_backward<T: Scalar>(
    input_shape: &[usize],
    argmax: &[usize],
    grad_out: &Tensor<T>,
) -> Result<Tensor<T>> {
    if argmax.len() != grad_out.len() {
        return Err(Error::shape(
            "maxpool2d backward",
            format!("{} saved indices for {} gradients", argmax.len(), grad_out.len()),
        ));
    }
    let mut gx = Tensor::zeros(input_shape.to_vec());
    let dst = gx.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        dst[idx] += g;
    }
    Ok(gx)
}

/// Mean over each whole channel plane: `[N,C,H,W] -> [N,C,1,1]`.
pub fn global_avg_pool<T: Scalar>(input: &Tensor<T>) -> Result<Tensor<T>> {
    let (n, c, h, w) = input.dims4("global_avg_pool")?;
    let area = T::from_f64((h * w) as f64);
    let out = input
        .data()
        .chunks(h * w)
        .map(|plane| plane.iter().copied().sum::<T>() / area)
        .collect();
    Tensor::new([n, c, 1, 1], out)
}

pub fn global_avg_pool_backward<T: Scalar>(input_shape: &[usize], grad_out: &Tensor<T>) -> Result<Tensor<T>> {
    let &[n, c, h, w] = input_shape else {
        return Err(Error::shape("global_avg_pool backward", format!("{:?}", input_shape)));
    };
    if grad_out.len() != n * c {
        return Err(Error::shape(
            "global_avg_pool backward",
            format!("upstream {:?} for input {:?}", grad_out.shape(), input_shape),
        ));
    }
    let area = T::from_f64((h * w) as f64);
    let mut data = vec![T::zero(); n * c * h * w];
    for (plane, &g) in data.chunks_mut(h * w).zip(grad_out.data()) {
        plane.fill(g / area);
    }
    Tensor::new(input_shape.to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_window_takes_max() {
        let x = Tensor::new([1, 1, 2, 2], vec![1.0f32, 2.0, 3.0, 4.0]).unwrap();
        let (y, idx) = maxpool2d(&x, PoolParams::new(2, 2, 0)).unwrap();
        assert_eq!(y.data(), &[4.0]);
        assert_eq!(idx, vec![3]);
    }

    #[test]
    fn ties_pick_first_row_major() {
        let x = Tensor::new([1, 1, 2, 2], vec![5.0f32, 5.0, 5.0, 5.0]).unwrap();
        let (_, idx) = maxpool2d(&x, PoolParams::new(2, 2, 0)).unwrap();
        assert_eq!(idx, vec![0]);
    }

    #[test]
    fn constant_map_stays_constant_with_padding() {
        let x = Tensor::full([1, 2, 5, 5], -3.5f32);
        for p in [PoolParams::new(3, 1, 1), PoolParams::new(2, 2, 0), PoolParams::new(3, 2, 1)] {
            let (y, _) = maxpool2d(&x, p).unwrap();
            assert!(y.data().iter().all(|&v| v == -3.5));
        }
    }

    #[test]
    fn same_padding_pool_keeps_extent() {
        let x = Tensor::<f32>::zeros([1, 1, 7, 6]);
        let (y, _) = maxpool2d(&x, PoolParams::new(3, 1, 1)).unwrap();
        assert_eq!(y.shape(), &[1, 1, 7, 6]);
    }

    #[test]
    fn oversized_window_is_rejected() {
        let x = Tensor::<f32>::zeros([1, 1, 2, 2]);
        assert!(maxpool2d(&x, PoolParams::new(3, 1, 0)).is_err());
        assert!(maxpool2d(&x, PoolParams::new(2, 1, 2)).is_err());
    }

    #[test]
    fn backward_routes_to_argmax() {
        let x = Tensor::new([1, 1, 2, 4], vec![1.0f32, 9.0, 0.0, 2.0, 3.0, 4.0, 8.0, 7.0]).unwrap();
        let (_, idx) = maxpool2d(&x, PoolParams::new(2, 2, 0)).unwrap();
        let g = Tensor::new([1, 1, 1, 2], vec![1.5f32, -2.0]).unwrap();
        let gx = maxpool2d_backward(x.shape(), &idx, &g).unwrap();
        assert_eq!(gx.data(), &[0.0, 1.5, 0.0, 0.0, 0.0, 0.0, -2.0, 0.0]);
    }

    #[test]
    fn global_average() {
        let x = Tensor::new([1, 2, 1, 2], vec![1.0f32, 3.0, -1.0, 5.0]).unwrap();
        let y = global_avg_pool(&x).unwrap();
        assert_eq!(y.data(), &[2.0, 2.0]);
        let g = global_avg_pool_backward(x.shape(), &Tensor::new([1, 2, 1, 1], vec![1.0f32, 2.0]).unwrap()).unwrap();
        assert_eq!(g.data(), &[0.5, 0.5, 1.0, 1.0]);
    }
}
