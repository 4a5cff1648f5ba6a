use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{atan2, sqrt};

use crate::image::GrayImage;
use crate::tensor::Tensor;

/// Unsigned-orientation HoG over square cells with overlapping square
/// blocks (stride one cell) and L2 block normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HogSpec {
    /// Bins over `[0, π)`; bin `b` is centred on `b·π/bins`.
    pub bins: usize,
    pub cell_size: usize,
    /// Block side in cells.
    pub block: usize,
    pub epsilon: f64,
}

impl Default for HogSpec {
    fn default() -> Self {
        HogSpec {
            bins: 8,
            cell_size: 8,
            block: 2,
            epsilon: 1e-5,
        }
    }
}

impl HogSpec {
    /// 8-pixel cells at 112 px and above, 4-pixel cells for small characters.
    pub fn for_resolution(size: usize) -> Self {
        HogSpec {
            cell_size: if size >= 64 { 8 } else { 4 },
            ..Self::default()
        }
    }
}

/// Cell histograms and their block-normalized forms.
#[derive(Debug, Clone, PartialEq)]
pub struct HogDescriptor {
    pub cells_y: usize,
    pub cells_x: usize,
    pub bins: usize,
    /// Raw magnitude-weighted histograms, `cells_y × cells_x × bins`.
    pub histograms: Vec<f64>,
    /// Each normalized block vector.
    pub blocks: Vec<Vec<f64>>,
    /// Per cell: mean of its normalized appearances over all blocks covering it.
    pub cell_features: Vec<f64>,
}

fn centered_gradient(img: &GrayImage, y: usize, x: usize) -> (f64, f64) {
    let (y, x) = (y as isize, x as isize);
    let gx = img.get_clamped(y, x + 1) as f64 - img.get_clamped(y, x - 1) as f64;
    // y up
    let gy = img.get_clamped(y - 1, x) as f64 - img.get_clamped(y + 1, x) as f64;
    (gx, gy)
}

/// HoG over an image whose sides are first padded (edge replication) up to a multiple of the cell size.
pub fn hog_descriptor(image: &GrayImage, spec: &HogSpec) -> HogDescriptor {
    let cs = spec.cell_size.max(1);
    let cells_y = image.height().div_ceil(cs);
    let cells_x = image.width().div_ceil(cs);
    let padded = GrayImage::from_fn(cells_y * cs, cells_x * cs, |y, x| image.get_clamped(y as isize, x as isize));
    let bins = spec.bins;
    let bin_width = PI / bins as f64;

    let mut histograms = vec![0.0; cells_y * cells_x * bins];
    for y in 0..padded.height() {
        for x in 0..padded.width() {
            let (gx, gy) = centered_gradient(&padded, y, x);
            let magnitude = sqrt(gx * gx + gy * gy);
            if magnitude == 0.0 {
                continue;
            }
            let mut orientation = atan2(gy, gx);
            if orientation < 0.0 {
                orientation += PI;
            }
            if orientation >= PI {
                orientation -= PI;
            }
            let t = orientation / bin_width;
            let lo = t as usize;
            let frac = t - lo as f64;
            let cell = ((y / cs) * cells_x + x / cs) * bins;
            histograms[cell + lo % bins] += magnitude * (1.0 - frac);
            histograms[cell + (lo + 1) % bins] += magnitude * frac;
        }
    }

    let bh = spec.block.clamp(1, cells_y);
    let bw = spec.block.clamp(1, cells_x);
    let mut blocks = Vec::new();
    let mut sums = vec![0.0; cells_y * cells_x * bins];
    let mut hits = vec![0usize; cells_y * cells_x];
    for by in 0..=cells_y - bh {
        for bx in 0..=cells_x - bw {
            let mut v = Vec::with_capacity(bh * bw * bins);
            for cy in by..by + bh {
                for cx in bx..bx + bw {
                    let c = (cy * cells_x + cx) * bins;
                    v.extend_from_slice(&histograms[c..c + bins]);
                }
            }
            let norm = sqrt(v.iter().map(|a| a * a).sum::<f64>() + spec.epsilon * spec.epsilon);
            for a in &mut v {
                *a /= norm;
            }
            let mut k = 0;
            for cy in by..by + bh {
                for cx in bx..bx + bw {
                    let cell = cy * cells_x + cx;
                    hits[cell] += 1;
                    for b in 0..bins {
                        sums[cell * bins + b] += v[k];
                        k += 1;
                    }
                }
            }
            blocks.push(v);
        }
    }
    let cell_features = sums
        .chunks(bins)
        .zip(&hits)
        .flat_map(|(s, &n)| s.iter().map(move |v| v / n as f64))
        .collect();
    HogDescriptor {
        cells_y,
        cells_x,
        bins,
        histograms,
        blocks,
        cell_features,
    }
}

/// One plane per bin: each cell's normalized value spread over its pixels.
pub fn hog_maps(image: &GrayImage, spec: &HogSpec) -> Tensor<f32> {
    let d = hog_descriptor(image, spec);
    let (h, w) = (image.height(), image.width());
    let cs = spec.cell_size.max(1);
    let mut data = vec![0.0f32; d.bins * h * w];
    for b in 0..d.bins {
        for y in 0..h {
            for x in 0..w {
                let cell = (y / cs) * d.cells_x + x / cs;
                data[(b * h + y) * w + x] = d.cell_features[cell * d.bins + b].clamp(0.0, 1.0) as f32;
            }
        }
    }
    Tensor::new([d.bins, h, w], data).expect("positive extents")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_image_gives_zero_planes() {
        let maps = hog_maps(&GrayImage::filled(16, 16, 0.3), &HogSpec::default());
        assert_eq!(maps.shape(), &[8, 16, 16]);
        assert!(maps.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_edge_votes_into_zero_degree_bin() {
        let img = GrayImage::from_fn(32, 32, |_, x| if x >= 13 { 1.0 } else { 0.0 });
        let d = hog_descriptor(&img, &HogSpec::default());
        let mut per_bin = [0.0; 8];
        for cell in d.histograms.chunks(8) {
            for (b, v) in cell.iter().enumerate() {
                per_bin[b] += v;
            }
        }
        let total: f64 = per_bin.iter().sum();
        assert!(per_bin[0] / total > 0.99, "{:?}", per_bin);
    }

    #[test]
    fn block_norm_bounded() {
        let img = GrayImage::from_fn(40, 36, |y, x| ((x * 7 + y * 3) % 11) as f32 / 10.0);
        let spec = HogSpec::default();
        let d = hog_descriptor(&img, &spec);
        assert_eq!((d.cells_y, d.cells_x), (5, 5));
        for b in &d.blocks {
            let n = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(n <= 1.0 + 1e-5);
        }
    }

    #[test]
    fn non_multiple_sizes_keep_image_extent() {
        let img = GrayImage::from_fn(13, 10, |y, x| ((x + y) % 2) as f32);
        let maps = hog_maps(&img, &HogSpec::for_resolution(13));
        assert_eq!(maps.shape(), &[8, 13, 10]);
        assert!(maps.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
