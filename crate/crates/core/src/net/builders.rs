//! Reference topologies: an inception network and a plain five-conv / three-fc network.

use alloc::vec::Vec;

use super::spec::{InceptionSpec, InputShape, Layer, NetworkSpec};
use crate::error::Result;
use crate::ops::PoolParams;

/// Classifier head after the last convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Flatten,
    GlobalAvgPool,
}

const STEM_POOL: PoolParams = PoolParams::new(3, 2, 1);

/// Widths of the inception network.
///
/// Layout: 7×7/2 conv, pool, 1×1 conv, 3×3 conv, pool, two inception
/// blocks, pool, two inception blocks, 1×1 reduction conv, head, hidden
/// fully-connected layer, dropout, classifier. That is 14 weighted layers
/// and, with the three pools, input and softmax, 19 under
/// [`DepthConvention::WeightedPoolingIo`](super::DepthConvention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoogLeNetConfig {
    pub input: InputShape,
    pub class_count: usize,
    pub stem: [usize; 3],
    pub inceptions: [InceptionSpec; 4],
    pub reduction: usize,
    pub hidden: usize,
    pub head: Head,
    pub dropout: f32,
}

impl GoogLeNetConfig {
    /// 120×120 input. Lands near 7.3M parameters at 3755 classes.
    pub fn reference_full(in_channels: usize, class_count: usize) -> Self {
        GoogLeNetConfig {
            input: InputShape::new(in_channels, 120, 120),
            class_count,
            stem: [64, 64, 192],
            inceptions: [
                InceptionSpec::new(64, 96, 128, 16, 32, 32),
                InceptionSpec::new(128, 128, 192, 32, 96, 64),
                InceptionSpec::new(192, 96, 208, 16, 48, 64),
                InceptionSpec::new(160, 112, 224, 24, 64, 64),
            ],
            reduction: 32,
            hidden: 1024,
            head: Head::Flatten,
            dropout: 0.5,
        }
    }

    /// Widths of [`reference_full`](Self::reference_full) divided by 8
    /// (rounded up) on a `size`×`size` input, for desk-scale experiments.
    /// The reduction in front of the classifier keeps 16 channels; at 4 it
    /// starves the head and training often stalls with dead units.
    pub fn reference_small(in_channels: usize, size: usize, class_count: usize) -> Self {
        let mut cfg = Self::reference_full(in_channels, class_count).map_widths(|w| w.div_ceil(8));
        cfg.input = InputShape::new(in_channels, size, size);
        cfg.reduction = 16;
        cfg
    }

    /// Applies `f` to every channel width (stem, inception, reduction, hidden), clamping at 1.
    pub fn map_widths(mut self, f: impl Fn(usize) -> usize) -> Self {
        let g = |w: usize| f(w).max(1);
        self.stem = self.stem.map(g);
        self.inceptions = self.inceptions.map(|s| InceptionSpec::new(g(s.c1), g(s.r3), g(s.c3), g(s.r5), g(s.c5), g(s.pp)));
        self.reduction = g(self.reduction);
        self.hidden = g(self.hidden);
        self
    }
}

pub fn build_hccr_googlenet(cfg: &GoogLeNetConfig) -> Result<NetworkSpec> {
    let conv = |out_channels, kernel, stride, padding| Layer::Conv {
        out_channels,
        kernel,
        stride,
        padding,
    };
    let [i3a, i3b, i4a, i4b] = cfg.inceptions;
    let mut layers = alloc::vec![
        conv(cfg.stem[0], 7, 2, 3),
        Layer::Relu,
        Layer::MaxPool(STEM_POOL),
        conv(cfg.stem[1], 1, 1, 0),
        Layer::Relu,
        conv(cfg.stem[2], 3, 1, 1),
        Layer::Relu,
        Layer::MaxPool(STEM_POOL),
        Layer::Inception(i3a),
        Layer::Inception(i3b),
        Layer::MaxPool(STEM_POOL),
        Layer::Inception(i4a),
        Layer::Inception(i4b),
        conv(cfg.reduction, 1, 1, 0),
        Layer::Relu,
    ];
    if cfg.head == Head::GlobalAvgPool {
        layers.push(Layer::GlobalAvgPool);
    }
    layers.extend([
        Layer::Flatten,
        Layer::FullyConnected { out_features: cfg.hidden },
        Layer::Relu,
        Layer::Dropout { rate: cfg.dropout },
        Layer::FullyConnected {
            out_features: cfg.class_count,
        },
        Layer::Softmax,
    ]);
    NetworkSpec::new(cfg.input, layers, cfg.class_count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvStage {
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvStage {
    pub const fn new(out_channels: usize, kernel: usize, stride: usize, padding: usize) -> Self {
        ConvStage {
            out_channels,
            kernel,
            stride,
            padding,
        }
    }
}

/// Five convolutions (pooled after the 1st, 2nd and 5th) and three
/// fully-connected layers, with dropout before the first two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlexNetConfig {
    pub input: InputShape,
    pub class_count: usize,
    pub convs: [ConvStage; 5],
    pub pool: PoolParams,
    pub hidden: [usize; 2],
    pub dropout: f32,
}

impl AlexNetConfig {
    /// 114×114 input.
    pub fn reference_full(in_channels: usize, class_count: usize) -> Self {
        AlexNetConfig {
            input: InputShape::new(in_channels, 114, 114),
            class_count,
            convs: [
                ConvStage::new(96, 11, 4, 2),
                ConvStage::new(256, 5, 1, 2),
                ConvStage::new(384, 3, 1, 1),
                ConvStage::new(384, 3, 1, 1),
                ConvStage::new(256, 3, 1, 1),
            ],
            pool: PoolParams::new(3, 2, 0),
            hidden: [4096, 4096],
            dropout: 0.5,
        }
    }

    /// Widths divided by 8 on a `size`×`size` input. The first convolution
    /// becomes 5×5 stride 1 and pools gain padding so a 32×32 input survives
    /// the three pooling stages.
    pub fn reference_small(in_channels: usize, size: usize, class_count: usize) -> Self {
        let full = Self::reference_full(in_channels, class_count);
        let mut convs = full.convs.map(|c| ConvStage {
            out_channels: c.out_channels.div_ceil(8),
            ..c
        });
        convs[0].kernel = 5;
        convs[0].stride = 1;
        AlexNetConfig {
            input: InputShape::new(in_channels, size, size),
            convs,
            pool: PoolParams::new(3, 2, 1),
            hidden: full.hidden.map(|h| h / 8),
            ..full
        }
    }
}

pub fn build_hccr_alexnet(cfg: &AlexNetConfig) -> Result<NetworkSpec> {
    let mut layers = Vec::new();
    for (i, c) in cfg.convs.iter().enumerate() {
        layers.push(Layer::Conv {
            out_channels: c.out_channels,
            kernel: c.kernel,
            stride: c.stride,
            padding: c.padding,
        });
        layers.push(Layer::Relu);
        if matches!(i, 0 | 1 | 4) {
            layers.push(Layer::MaxPool(cfg.pool));
        }
    }
    layers.push(Layer::Flatten);
    for &h in &cfg.hidden {
        layers.extend([
            Layer::Dropout { rate: cfg.dropout },
            Layer::FullyConnected { out_features: h },
            Layer::Relu,
        ]);
    }
    layers.extend([
        Layer::FullyConnected {
            out_features: cfg.class_count,
        },
        Layer::Softmax,
    ]);
    NetworkSpec::new(cfg.input, layers, cfg.class_count)
}
