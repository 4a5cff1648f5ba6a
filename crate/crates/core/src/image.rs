//! Single-channel images with values nominally in `[0, 1]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::shape(
                "image",
                format!("{}x{} image with {} pixels", height, width, data.len()),
            ));
        }
        Ok(GrayImage { height, width, data })
    }

    /// Panics on a zero extent.
    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        assert!(height > 0 && width > 0, "image extents must be positive");
        GrayImage {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut img = Self::filled(height, width, 0.0);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(y, x);
            }
        }
        img
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with edge replication outside the image.
    pub fn get_clamped(&self, y: isize, x: isize) -> f32 {
        let y = y.clamp(0, self.height as isize - 1) as usize;
        let x = x.clamp(0, self.width as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn in_unit_range(&self) -> bool {
        self.data.iter().all(|&v| (0.0..=1.0).contains(&v))
    }

    pub fn to_tensor(&self) -> Tensor<f32> {
        Tensor::new([self.height, self.width], self.data.clone()).expect("image extents are positive")
    }

    pub fn from_tensor(t: &Tensor<f32>) -> Result<Self> {
        let (h, w) = t.dims2("image")?;
        Self::new(h, w, t.data().to_vec())
    }

    /// Same-size cross-correlation with an odd `k`×`k` kernel; the border is edge-replicated.
    pub fn correlate_replicate(&self, kernel: &[f64], k: usize) -> Vec<f64> {
        debug_assert_eq!(kernel.len(), k * k);
        let half = (k / 2) as isize;
        let mut out = vec![0.0; self.data.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                let mut acc = 0.0;
                for ky in 0..k {
                    for kx in 0..k {
                        let v = self.get_clamped(y as isize + ky as isize - half, x as isize + kx as isize - half);
                        acc += kernel[ky * k + kx] * v as f64;
                    }
                }
                out[y * self.width + x] = acc;
            }
        }
        out
    }
}
