use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Stride and symmetric zero padding of a 2-D convolution.
///
/// Every output map reads every input map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvParams {
    pub stride: usize,
    pub padding: usize,
}

impl ConvParams {
    pub const fn new(stride: usize, padding: usize) -> Self {
        ConvParams { stride, padding }
    }

    /// Stride 1 with `kernel / 2` padding, which keeps odd-kernel outputs at input size.
    pub const fn same(kernel: usize) -> Self {
        ConvParams {
            stride: 1,
            padding: kernel / 2,
        }
    }
}

impl Default for ConvParams {
    fn default() -> Self {
        ConvParams::new(1, 0)
    }
}

/// `floor((input + 2·padding − kernel) / stride) + 1`, or `None` when that is not a positive extent.
pub fn output_extent(input: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = input + 2 * padding;
    if stride == 0 || kernel == 0 || padded < kernel {
        None
    } else {
        Some((padded - kernel) / stride + 1)
    }
}

#[derive(Debug, Clone, Copy)]
struct Geometry {
    n: usize,
    c: usize,
    h: usize,
    w: usize,
    f: usize,
    kh: usize,
    kw: usize,
    oh: usize,
    ow: usize,
    stride: usize,
    pad: usize,
}

impl Geometry {
    fn patch(&self) -> usize {
        self.c * self.kh * self.kw
    }
    fn positions(&self) -> usize {
        self.oh * self.ow
    }
    // 1×1, stride 1, no padding: the input plane already is the column matrix.
    fn pointwise(&self) -> bool {
        self.kh == 1 && self.kw == 1 && self.stride == 1 && self.pad == 0
    }
}

fn geometry<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias_len: usize,
    params: ConvParams,
) -> Result<Geometry> {
    let (n, c, h, w) = input.dims4("conv2d")?;
    let (f, wc, kh, kw) = weights.dims4("conv2d")?;
    if wc != c {
        return Err(Error::shape(
            "conv2d",
            format!(
                "input {:?} has {} channels but weights {:?} expect {}",
                input.shape(),
                c,
                weights.shape(),
                wc
            ),
        ));
    }
    if bias_len != f {
        return Err(Error::shape(
            "conv2d",
            format!("bias has {} entries for {} filters", bias_len, f),
        ));
    }
    if params.stride == 0 {
        return Err(Error::invalid("conv2d stride must be positive"));
    }
    let oh = output_extent(h, kh, params.stride, params.padding);
    let ow = output_extent(w, kw, params.stride, params.padding);
    let (Some(oh), Some(ow)) = (oh, ow) else {
        return Err(Error::EmptyOutput {
            op: "conv2d",
            detail: format!(
                "{}x{} kernel, stride {}, padding {} over {}x{} input",
                kh, kw, params.stride, params.padding, h, w
            ),
        });
    };
    Ok(Geometry {
        n,
        c,
        h,
        w,
        f,
        kh,
        kw,
        oh,
        ow,
        stride: params.stride,
        pad: params.padding,
    })
}

// Rows ordered channel-major, then kernel row, then kernel column; this
// fixes the accumulation order of every output element.
fn im2col<T: Scalar>(x: &[T], g: &Geometry, cols: &mut [T]) {
    let p = g.positions();
    for c in 0..g.c {
        let plane = &x[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let row = (c * g.kh + ky) * g.kw + kx;
                let dst = &mut cols[row * p..(row + 1) * p];
                for oy in 0..g.oh {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    let line = &mut dst[oy * g.ow..(oy + 1) * g.ow];
                    if iy < 0 || iy >= g.h as isize {
                        line.fill(T::zero());
                        continue;
                    }
                    let src = &plane[iy as usize * g.w..(iy as usize + 1) * g.w];
                    for (ox, v) in line.iter_mut().enumerate() {
                        let ix = (ox * g.stride + kx) as isize - g.pad as isize;
                        *v = if ix < 0 || ix >= g.w as isize {
                            T::zero()
                        } else {
                            src[ix as usize]
                        };
                    }
                }
            }
        }
    }
}

fn col2im<T: Scalar>(cols: &[T], g: &Geometry, x: &mut [T]) {
    let p = g.positions();
    for c in 0..g.c {
        let plane = &mut x[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let row = (c * g.kh + ky) * g.kw + kx;
                let src = &cols[row * p..(row + 1) * p];
                for oy in 0..g.oh {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    if iy < 0 || iy >= g.h as isize {
                        continue;
                    }
                    let dst = &mut plane[iy as usize * g.w..(iy as usize + 1) * g.w];
                    for ox in 0..g.ow {
                        let ix = (ox * g.stride + kx) as isize - g.pad as isize;
                        if ix >= 0 && ix < g.w as isize {
                            dst[ix as usize] += src[oy * g.ow + ox];
                        }
                    }
                }
            }
        }
    }
}

/// Cross-correlation of `input` `[N,C,H,W]` with `weights` `[F,C,Kh,Kw]` plus a per-filter bias.
pub fn conv2d<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &[T],
    params: ConvParams,
) -> Result<Tensor<T>> {
    let g = geometry(input, weights, bias.len(), params)?;
    let (k, p) = (g.patch(), g.positions());
    let chw = g.c * g.h * g.w;
    let w = weights.data();
    let mut out = vec![T::zero(); g.n * g.f * p];
    let mut cols = if g.pointwise() {
        Vec::new()
    } else {
        vec![T::zero(); k * p]
    };
    for s in 0..g.n {
        let x = &input.data()[s * chw..(s + 1) * chw];
        let src: &[T] = if g.pointwise() {
            x
        } else {
            im2col(x, &g, &mut cols);
            &cols
        };
        let o = &mut out[s * g.f * p..(s + 1) * g.f * p];
        for fi in 0..g.f {
            let row = &mut o[fi * p..(fi + 1) * p];
            row.fill(bias[fi]);
            for (ki, &wv) in w[fi * k..(fi + 1) * k].iter().enumerate() {
                let crow = &src[ki * p..(ki + 1) * p];
                for (o, &c) in row.iter_mut().zip(crow) {
                    *o += wv * c;
                }
            }
        }
    }
    Tensor::new([g.n, g.f, g.oh, g.ow], out)
}

/// Gradients of [`conv2d`] with respect to its input, weights and bias.
#[derive(Debug, Clone)]
pub struct ConvGrads<T: Scalar> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Vec<T>,
}

pub fn conv2d_backward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    grad_out: &Tensor<T>,
    params: ConvParams,
) -> Result<ConvGrads<T>> {
    let f = weights.shape().first().copied().unwrap_or(0);
    let g = geometry(input, weights, f, params)?;
    if grad_out.shape() != [g.n, g.f, g.oh, g.ow] {
        return Err(Error::shape(
            "conv2d backward",
            format!(
                "upstream gradient {:?}, expected {:?}",
                grad_out.shape(),
                [g.n, g.f, g.oh, g.ow]
            ),
        ));
    }
    let (k, p) = (g.patch(), g.positions());
    let chw = g.c * g.h * g.w;
    let w = weights.data();
    let mut gx = vec![T::zero(); g.n * chw];
    let mut gw = vec![T::zero(); g.f * k];
    let mut gb = vec![T::zero(); g.f];
    let mut cols = vec![T::zero(); k * p];
    let mut gcols = vec![T::zero(); k * p];
    for s in 0..g.n {
        let x = &input.data()[s * chw..(s + 1) * chw];
        let go = &grad_out.data()[s * g.f * p..(s + 1) * g.f * p];
        let src: &[T] = if g.pointwise() {
            x
        } else {
            im2col(x, &g, &mut cols);
            &cols
        };
        gcols.fill(T::zero());
        for fi in 0..g.f {
            let grow = &go[fi * p..(fi + 1) * p];
            gb[fi] += grow.iter().copied().sum::<T>();
            let wrow = &w[fi * k..(fi + 1) * k];
            let gwrow = &mut gw[fi * k..(fi + 1) * k];
            for ki in 0..k {
                let crow = &src[ki * p..(ki + 1) * p];
                let mut acc = T::zero();
                for (&a, &b) in grow.iter().zip(crow) {
                    acc += a * b;
                }
                gwrow[ki] += acc;
                let wv = wrow[ki];
                for (d, &a) in gcols[ki * p..(ki + 1) * p].iter_mut().zip(grow) {
                    *d += wv * a;
                }
            }
        }
        let dst = &mut gx[s * chw..(s + 1) * chw];
        if g.pointwise() {
            dst.copy_from_slice(&gcols[..chw]);
        } else {
            col2im(&gcols, &g, dst);
        }
    }
    Ok(ConvGrads {
        input: Tensor::new(input.shape().to_vec(), gx)?,
        weights: Tensor::new(weights.shape().to_vec(), gw)?,
        bias: gb,
    })
}
