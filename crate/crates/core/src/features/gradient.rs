use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::atan2;

use crate::image::GrayImage;
use crate::tensor::Tensor;

const R: f64 = FRAC_1_SQRT_2;

/// The eight chaincode unit directions, east first, counterclockwise with
/// `y` pointing up.
pub const CHAINCODE: [(f64, f64); 8] = [
    (1.0, 0.0),
    (R, R),
    (0.0, 1.0),
    (-R, R),
    (-1.0, 0.0),
    (-R, -R),
    (0.0, -1.0),
    (R, -R),
];

/// Sobel 3×3 gradient decomposed onto the 8 chaincode directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GradientDecompSpec;

impl GradientDecompSpec {
    pub const DIRECTIONS: usize = 8;
}

/// Sobel gradient `(gx, gy)` per pixel with `gy` pointing up (against the
/// row index); edge-replicated border.
pub fn sobel(image: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let (h, w) = (image.height(), image.width());
    let mut gx = vec![0.0; h * w];
    let mut gy = vec![0.0; h * w];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dy: isize, dx: isize| image.get_clamped(y + dy, x + dx) as f64;
            let dx = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let down = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let i = y as usize * w + x as usize;
            gx[i] = dx;
            gy[i] = -down;
        }
    }
    (gx, gy)
}

/// Parallelogram decomposition `g = a·d_i + b·d_{i+1}` with `a, b ≥ 0`
/// onto the two chaincode directions bracketing `g`. Returns `(i, a, b)`,
/// or `None` for a zero gradient.
pub fn decompose_gradient(gx: f64, gy: f64) -> Option<(usize, f64, f64)> {
    if gx == 0.0 && gy == 0.0 {
        return None;
    }
    let mut angle = atan2(gy, gx);
    if angle < 0.0 {
        angle += 2.0 * PI;
    }
    let i = ((angle / (PI / 4.0)) as usize) % 8;
    let (ax, ay) = CHAINCODE[i];
    let (bx, by) = CHAINCODE[(i + 1) % 8];
    // Cramer's rule; the determinant of two 45°-apart unit vectors is sin 45°.
    let det = ax * by - ay * bx;
    let a = (gx * by - gy * bx) / det;
    let b = (ax * gy - ay * gx) / det;
    Some((i, a.max(0.0), b.max(0.0)))
}

/// Raw decomposition coefficients, `[8,H,W]`.
pub fn gradient_components(image: &GrayImage) -> Tensor<f64> {
    let plane = image.height() * image.width();
    let (gx, gy) = sobel(image);
    let mut data = vec![0.0; 8 * plane];
    for (p, (&x, &y)) in gx.iter().zip(&gy).enumerate() {
        if let Some((i, a, b)) = decompose_gradient(x, y) {
            data[i * plane + p] = a;
            data[((i + 1) % 8) * plane + p] = b;
        }
    }
    Tensor::new([8, image.height(), image.width()], data).expect("positive extents")
}

/// Chaincode gradient planes scaled by their common maximum into `[0, 1]`.
pub fn gradient_maps(image: &GrayImage, _spec: &GradientDecompSpec) -> Tensor<f32> {
    let raw = gradient_components(image);
    let max = raw.data().iter().copied().fold(0.0, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    raw.cast::<f32>().map(|v| (v as f64 * scale) as f32)
}
