use alloc::format;

use crate::error::{Error, Result};
use crate::image::GrayImage;

use super::Sample;

/// Character size and mask size for one network family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocSpec {
    /// Side of the resized character.
    pub target: usize,
    /// Side of the zero mask the character is centred in.
    pub mask: usize,
    pub invert: bool,
}

impl PreprocSpec {
    pub const fn new(target: usize, mask: usize) -> Self {
        Self { target, mask, invert: true }
    }

    /// 112 px characters on a 120 px mask.
    pub const fn googlenet() -> Self {
        Self::new(112, 120)
    }

    /// 108 px characters on a 114 px mask.
    pub const fn alexnet() -> Self {
        Self::new(108, 114)
    }

    /// Reduced-resolution setting: a 2 px margin on each side.
    pub fn for_mask(mask: usize) -> Self {
        Self::new(mask.saturating_sub(4).max(1), mask)
    }

    pub fn validate(&self) -> Result<()> {
        if self.target == 0 || self.mask <= self.target || (self.mask - self.target) % 2 != 0 {
            return Err(Error::invalid(format!(
                "preprocessing target {} needs a larger mask than {} with an even margin",
                self.target, self.mask
            )));
        }
        Ok(())
    }
}

/// Maps white-background dark ink to black-background bright ink.
pub fn invert_gray(image: &GrayImage) -> GrayImage {
    GrayImage::from_fn(image.height(), image.width(), |y, x| 1.0 - image.get(y, x))
}

fn source_coord(dst: usize, src_len: usize, dst_len: usize) -> f64 {
    if dst_len <= 1 {
        return (src_len as f64 - 1.0) / 2.0;
    }
    dst as f64 * (src_len as f64 - 1.0) / (dst_len as f64 - 1.0)
}

/// Corner-aligned bilinear resize to `target × target`.
pub fn resize_bilinear(image: &GrayImage, target: usize) -> Result<GrayImage> {
    if target == 0 {
        return Err(Error::invalid("resize target must be at least 1"));
    }
    let (h, w) = (image.height(), image.width());
    if h == 0 || w == 0 {
        return Err(Error::invalid("cannot resize an empty image"));
    }
    Ok(GrayImage::from_fn(target, target, |ty, tx| {
        let sy = source_coord(ty, h, target);
        let sx = source_coord(tx, w, target);
        let (y0, x0) = (libm::floor(sy) as usize, libm::floor(sx) as usize);
        let (y1, x1) = ((y0 + 1).min(h - 1), (x0 + 1).min(w - 1));
        let (fy, fx) = (sy - y0 as f64, sx - x0 as f64);
        let top = image.get(y0, x0) as f64 * (1.0 - fx) + image.get(y0, x1) as f64 * fx;
        let bottom = image.get(y1, x0) as f64 * (1.0 - fx) + image.get(y1, x1) as f64 * fx;
        (top * (1.0 - fy) + bottom * fy) as f32
    }))
}

/// Centres a square image in a `mask × mask` canvas of zeros.
pub fn center_pad(image: &GrayImage, mask: usize) -> Result<GrayImage> {
    let (h, w) = (image.height(), image.width());
    if h > mask || w > mask {
        return Err(Error::invalid(format!("{}x{} image does not fit a {} mask", h, w, mask)));
    }
    if (mask - h) % 2 != 0 || (mask - w) % 2 != 0 {
        return Err(Error::invalid(format!("{}x{} image leaves an odd margin in a {} mask", h, w, mask)));
    }
    let (oy, ox) = ((mask - h) / 2, (mask - w) / 2);
    Ok(GrayImage::from_fn(mask, mask, |y, x| {
        if y >= oy && y < oy + h && x >= ox && x < ox + w {
            image.get(y - oy, x - ox)
        } else {
            0.0
        }
    }))
}

/// Invert, resize and pad one sample.
pub fn preprocess(sample: &Sample, spec: &PreprocSpec) -> Result<Sample> {
    spec.validate()?;
    let inverted = if spec.invert { invert_gray(&sample.image) } else { sample.image.clone() };
    let image = center_pad(&resize_bilinear(&inverted, spec.target)?, spec.mask)?;
    Ok(Sample {
        image,
        label: sample.label,
        class_name: sample.class_name.clone(),
    })
}
