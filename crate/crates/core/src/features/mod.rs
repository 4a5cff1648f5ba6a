//! Directional feature planes injected next to (or instead of) the character bitmap.

mod gabor;
mod gradient;
mod hog;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use gabor::{gabor_kernel, gabor_maps, gabor_responses, GaborBankSpec};
pub use gradient::{decompose_gradient, gradient_components, gradient_maps, sobel, GradientDecompSpec, CHAINCODE};
pub use hog::{hog_descriptor, hog_maps, HogDescriptor, HogSpec};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::tensor::Tensor;

/// Composition of the network input planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputMode {
    Original,
    OriginalGabor,
    OriginalGradient,
    OriginalHog,
    GaborOnly,
}

impl InputMode {
    pub const ALL: [InputMode; 5] = [
        InputMode::Original,
        InputMode::OriginalGabor,
        InputMode::OriginalGradient,
        InputMode::OriginalHog,
        InputMode::GaborOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InputMode::Original => "original",
            InputMode::OriginalGabor => "original+gabor",
            InputMode::OriginalGradient => "original+gradient",
            InputMode::OriginalHog => "original+hog",
            InputMode::GaborOnly => "gabor-only",
        }
    }

    /// Plane count for the default 8-direction extractors.
    pub fn channels(self) -> usize {
        match self {
            InputMode::Original => 1,
            InputMode::GaborOnly => 8,
            _ => 9,
        }
    }

    pub fn code(self) -> u32 {
        match self {
            InputMode::Original => 0,
            InputMode::OriginalGabor => 1,
            InputMode::OriginalGradient => 2,
            InputMode::OriginalHog => 3,
            InputMode::GaborOnly => 4,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.code() == code)
    }
}

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown input mode {:?}", s)))
    }
}

/// Extractor settings used together by [`stack_input`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub gabor: GaborBankSpec,
    pub gradient: GradientDecompSpec,
    pub hog: HogSpec,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            gabor: GaborBankSpec::default(),
            gradient: GradientDecompSpec,
            hog: HogSpec::default(),
        }
    }
}

impl FeatureConfig {
    /// Defaults tuned for 112-pixel characters, scaled down for smaller inputs.
    pub fn for_resolution(size: usize) -> Self {
        FeatureConfig {
            gabor: GaborBankSpec::for_resolution(size),
            gradient: GradientDecompSpec,
            hog: HogSpec::for_resolution(size),
        }
    }
}

/// Network input planes `[C,H,W]`, all in `[0, 1]`, original bitmap first when present.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStack {
    pub planes: Tensor<f32>,
    pub mode: InputMode,
}

pub fn stack_input(image: &GrayImage, mode: InputMode, cfg: &FeatureConfig) -> Result<FeatureStack> {
    let (h, w) = (image.height(), image.width());
    let mut data: Vec<f32> = Vec::with_capacity(mode.channels() * h * w);
    if mode != InputMode::GaborOnly {
        data.extend_from_slice(image.data());
    }
    let maps = match mode {
        InputMode::Original => None,
        InputMode::OriginalGabor | InputMode::GaborOnly => Some(gabor_maps(image, &cfg.gabor)?),
        InputMode::OriginalGradient => Some(gradient_maps(image, &cfg.gradient)),
        InputMode::OriginalHog => Some(hog_maps(image, &cfg.hog)),
    };
    if let Some(maps) = maps {
        data.extend_from_slice(maps.data());
    }
    let c = data.len() / (h * w);
    Ok(FeatureStack {
        planes: Tensor::new([c, h, w], data)?,
        mode,
    })
}

/// Rescales each `h·w` plane to `[0, 1]` by its own min and max; constant planes become zero.
pub(crate) fn rescale_per_plane(raw: &[f64], plane: usize) -> Vec<f32> {
    let mut out = Vec::with_capacity(raw.len());
    for p in raw.chunks(plane) {
        let (lo, hi) = p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = hi - lo;
        // Relative guard: spans at rounding-noise level count as constant.
        if !(span > 1e-9 * hi.abs().max(lo.abs()).max(1.0)) {
            out.extend(core::iter::repeat(0.0).take(p.len()));
        } else {
            out.extend(p.iter().map(|&v| ((v - lo) / span) as f32));
        }
    }
    out
}
