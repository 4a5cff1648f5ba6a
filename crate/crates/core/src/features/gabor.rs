use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, sin};

use super::rescale_per_plane;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::tensor::Tensor;

/// Real-valued Gabor filter bank over `orientations` angles `kπ / orientations`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborBankSpec {
    pub orientations: usize,
    /// Odd, at least 3.
    pub kernel_size: usize,
    /// Pixels per carrier period.
    pub wavelength: f64,
    /// Envelope standard deviation in pixels.
    pub sigma: f64,
    /// Envelope aspect ratio γ (y' is scaled by γ).
    pub aspect: f64,
    /// Carrier phase ψ in radians.
    pub phase: f64,
}

impl Default for GaborBankSpec {
    fn default() -> Self {
        GaborBankSpec {
            orientations: 8,
            kernel_size: 11,
            wavelength: 8.0,
            sigma: 0.56 * 8.0,
            aspect: 0.5,
            phase: 0.0,
        }
    }
}

impl GaborBankSpec {
    /// Scales the 112-pixel defaults to a `size`-pixel character, keeping
    /// the wavelength at 4 px or more.
    pub fn for_resolution(size: usize) -> Self {
        let wavelength = (8.0 * size as f64 / 112.0).max(4.0);
        let mut kernel_size = ((1.375 * wavelength) + 0.5) as usize;
        if kernel_size % 2 == 0 {
            kernel_size += 1;
        }
        GaborBankSpec {
            kernel_size: kernel_size.max(3),
            wavelength,
            sigma: 0.56 * wavelength,
            ..Self::default()
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.orientations)
            .map(|k| k as f64 * PI / self.orientations as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_size < 3 || self.kernel_size % 2 == 0 {
            return Err(Error::invalid(format!(
                "gabor kernel size must be odd and >= 3, got {}",
                self.kernel_size
            )));
        }
        if self.orientations == 0 || !(self.wavelength > 0.0) || !(self.sigma > 0.0) || !(self.aspect > 0.0) {
            return Err(Error::invalid(format!("degenerate gabor parameters {:?}", self)));
        }
        Ok(())
    }
}

/// `exp(−(x'² + γ²y'²) / 2σ²) · cos(2πx'/λ + ψ)` sampled on a `k`×`k` grid
/// centred on the origin, with its mean subtracted. Row-major, rows are `y`.
pub fn gabor_kernel(theta: f64, spec: &GaborBankSpec) -> Result<Tensor<f64>> {
    spec.validate()?;
    let k = spec.kernel_size;
    let half = (k / 2) as f64;
    let (st, ct) = (sin(theta), cos(theta));
    let mut kernel = Tensor::from_fn([k, k], |i| {
        let x = (i % k) as f64 - half;
        let y = (i / k) as f64 - half;
        let xr = x * ct + y * st;
        let yr = -x * st + y * ct;
        let envelope = exp(-(xr * xr + spec.aspect * spec.aspect * yr * yr) / (2.0 * spec.sigma * spec.sigma));
        envelope * cos(2.0 * PI * xr / spec.wavelength + spec.phase)
    });
    let mean = kernel.sum() / (k * k) as f64;
    for v in kernel.data_mut() {
        *v -= mean;
    }
    Ok(kernel)
}

/// Raw (unscaled) filter responses, `[D,H,W]`.
pub fn gabor_responses(image: &GrayImage, spec: &GaborBankSpec) -> Result<Tensor<f64>> {
    spec.validate()?;
    if image.height() < spec.kernel_size || image.width() < spec.kernel_size {
        return Err(Error::invalid(format!(
            "{}x{} image is smaller than the {}x{} gabor kernel",
            image.height(),
            image.width(),
            spec.kernel_size,
            spec.kernel_size
        )));
    }
    let mut data = Vec::with_capacity(spec.orientations * image.data().len());
    for theta in spec.thetas() {
        let kernel = gabor_kernel(theta, spec)?;
        data.extend(image.correlate_replicate(kernel.data(), spec.kernel_size));
    }
    Tensor::new([spec.orientations, image.height(), image.width()], data)
}

/// Gabor planes, each min-max rescaled to `[0, 1]`.
pub fn gabor_maps(image: &GrayImage, spec: &GaborBankSpec) -> Result<Tensor<f32>> {
    let raw = gabor_responses(image, spec)?;
    let plane = image.height() * image.width();
    Tensor::new(raw.shape().to_vec(), rescale_per_plane(raw.data(), plane))
}
