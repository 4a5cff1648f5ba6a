use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ops::{output_extent, PoolParams};

/// Channels of the four parallel inception branches.
///
/// `r3` and `r5` are the 1×1 reductions in front of the 3×3 and 5×5
/// convolutions; `pp` is the 1×1 projection after the 3×3 max pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InceptionSpec {
    pub c1: usize,
    pub r3: usize,
    pub c3: usize,
    pub r5: usize,
    pub c5: usize,
    pub pp: usize,
}

impl InceptionSpec {
    pub const fn new(c1: usize, r3: usize, c3: usize, r5: usize, c5: usize, pp: usize) -> Self {
        InceptionSpec { c1, r3, c3, r5, c5, pp }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [self.c1, self.r3, self.c3, self.r5, self.c5, self.pp];
        if counts.contains(&0) {
            return Err(Error::invalid(format!("inception channel counts must be >= 1: {:?}", self)));
        }
        Ok(())
    }

    pub fn out_channels(&self) -> usize {
        self.c1 + self.c3 + self.c5 + self.pp
    }

    /// The six convolutions in parameter order: `(out, in, kernel)`.
    pub fn convs(&self, in_channels: usize) -> [(usize, usize, usize); 6] {
        [
            (self.c1, in_channels, 1),
            (self.r3, in_channels, 1),
            (self.c3, self.r3, 3),
            (self.r5, in_channels, 1),
            (self.c5, self.r5, 5),
            (self.pp, in_channels, 1),
        ]
    }

    pub fn param_count(&self, in_channels: usize) -> usize {
        self.convs(in_channels)
            .iter()
            .map(|&(o, i, k)| o * i * k * k + o)
            .sum()
    }

    /// Every inception branch: stride 1, `k/2` padding, and a 3×3/1/1 pool.
    pub const POOL: PoolParams = PoolParams::new(3, 1, 1);
}

/// One entry of a [`NetworkSpec`]. `Conv` and `FullyConnected` carry no
/// activation; ReLU is its own layer (inception branches apply it inside).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layer {
    Conv {
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    Relu,
    MaxPool(PoolParams),
    GlobalAvgPool,
    Dropout { rate: f32 },
    Inception(InceptionSpec),
    Flatten,
    FullyConnected { out_features: usize },
    Softmax,
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv { .. } => "conv",
            Layer::Relu => "relu",
            Layer::MaxPool(_) => "maxpool",
            Layer::GlobalAvgPool => "global_avg_pool",
            Layer::Dropout { .. } => "dropout",
            Layer::Inception(_) => "inception",
            Layer::Flatten => "flatten",
            Layer::FullyConnected { .. } => "fully_connected",
            Layer::Softmax => "softmax",
        }
    }

    /// Depth contributed under the weighted-layer convention. An inception
    /// block counts as its longest weighted path (reduction + convolution).
    pub fn weighted_depth(&self) -> usize {
        match self {
            Layer::Conv { .. } | Layer::FullyConnected { .. } => 1,
            Layer::Inception(_) => 2,
            _ => 0,
        }
    }

    pub fn is_pooling(&self) -> bool {
        matches!(self, Layer::MaxPool(_) | Layer::GlobalAvgPool)
    }
}

/// `(C, H, W)` of a single network input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl InputShape {
    pub const fn new(channels: usize, height: usize, width: usize) -> Self {
        InputShape { channels, height, width }
    }
}

/// Activation shape between layers (batch axis omitted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActShape {
    Maps { c: usize, h: usize, w: usize },
    Flat(usize),
}

impl ActShape {
    pub fn elements(&self) -> usize {
        match *self {
            ActShape::Maps { c, h, w } => c * h * w,
            ActShape::Flat(d) => d,
        }
    }
}

/// How to count depth, see [`NetworkSpec::count_layers`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthConvention {
    /// Layers owning parameters; inception blocks count 2.
    Weighted,
    /// Weighted plus standalone pooling layers, the input and the softmax output.
    /// Concat layers and the pools inside inception blocks are not counted.
    WeightedPoolingIo,
}

/// Shape and name of one weighted layer's parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamShape {
    pub name: String,
    pub weight: Vec<usize>,
    pub bias: usize,
}

impl ParamShape {
    pub fn len(&self) -> usize {
        self.weight.iter().product::<usize>() + self.bias
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Validated layer sequence. Construction checks that shapes chain and that
/// the network ends in a single softmax over `class_count` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    input: InputShape,
    layers: Vec<Layer>,
    class_count: usize,
    shapes: Vec<ActShape>,
}

impl NetworkSpec {
    pub fn new(input: InputShape, layers: Vec<Layer>, class_count: usize) -> Result<Self> {
        if input.channels == 0 || input.height == 0 || input.width == 0 {
            return Err(Error::invalid(format!("input shape {:?} has a zero extent", input)));
        }
        if class_count == 0 {
            return Err(Error::invalid("class count must be positive"));
        }
        let shapes = infer_shapes(input, &layers)?;
        let softmaxes = layers.iter().filter(|l| matches!(l, Layer::Softmax)).count();
        if softmaxes != 1 || !matches!(layers.last(), Some(Layer::Softmax)) {
            return Err(Error::invalid("network must end in exactly one softmax layer"));
        }
        let logits = shapes[shapes.len() - 1];
        if logits != ActShape::Flat(class_count) {
            return Err(Error::invalid(format!(
                "network produces {:?} but declares {} classes",
                logits, class_count
            )));
        }
        Ok(NetworkSpec {
            input,
            layers,
            class_count,
            shapes,
        })
    }

    /// Same network with every dropout layer set to `rate`.
    pub fn with_dropout(&self, rate: f32) -> Result<Self> {
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Dropout { .. } => Layer::Dropout { rate },
                other => *other,
            })
            .collect();
        NetworkSpec::new(self.input, layers, self.class_count)
    }

    pub fn input(&self) -> InputShape {
        self.input
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Output shape after each layer.
    pub fn shapes(&self) -> &[ActShape] {
        &self.shapes
    }

    /// Shape feeding layer `index`.
    pub fn shape_before(&self, index: usize) -> ActShape {
        if index == 0 {
            ActShape::Maps {
                c: self.input.channels,
                h: self.input.height,
                w: self.input.width,
            }
        } else {
            self.shapes[index - 1]
        }
    }

    /// Weighted-layer parameter shapes in spec order; inception blocks
    /// contribute their six convolutions as 1×1, 1×1→3×3, 1×1→5×5, pool→1×1.
    pub fn param_shapes(&self) -> Vec<ParamShape> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let before = self.shape_before(i);
            match (*layer, before) {
                (Layer::Conv { out_channels, kernel, .. }, ActShape::Maps { c, .. }) => out.push(ParamShape {
                    name: format!("{}.conv", i),
                    weight: alloc::vec![out_channels, c, kernel, kernel],
                    bias: out_channels,
                }),
                (Layer::Inception(spec), ActShape::Maps { c, .. }) => {
                    for ((o, ic, k), tag) in spec.convs(c).into_iter().zip(["b1", "r3", "c3", "r5", "c5", "pp"]) {
                        out.push(ParamShape {
                            name: format!("{}.inception.{}", i, tag),
                            weight: alloc::vec![o, ic, k, k],
                            bias: o,
                        });
                    }
                }
                (Layer::FullyConnected { out_features }, ActShape::Flat(d)) => out.push(ParamShape {
                    name: format!("{}.fc", i),
                    weight: alloc::vec![out_features, d],
                    bias: out_features,
                }),
                _ => {}
            }
        }
        out
    }

    /// Total weight and bias elements over all weighted layers.
    pub fn count_parameters(&self) -> usize {
        self.param_shapes().iter().map(ParamShape::len).sum()
    }

    pub fn count_layers(&self, convention: DepthConvention) -> usize {
        let weighted: usize = self.layers.iter().map(Layer::weighted_depth).sum();
        match convention {
            DepthConvention::Weighted => weighted,
            DepthConvention::WeightedPoolingIo => {
                weighted + self.layers.iter().filter(|l| l.is_pooling()).count() + 2
            }
        }
    }

    pub fn inception_count(&self) -> usize {
        self.layers.iter().filter(|l| matches!(l, Layer::Inception(_))).count()
    }

    pub fn count_kind(&self, kind: &str) -> usize {
        self.layers.iter().filter(|l| l.kind() == kind).count()
    }
}

fn infer_shapes(input: InputShape, layers: &[Layer]) -> Result<Vec<ActShape>> {
    let mut cur = ActShape::Maps {
        c: input.channels,
        h: input.height,
        w: input.width,
    };
    let mut shapes = Vec::with_capacity(layers.len());
    for (index, layer) in layers.iter().enumerate() {
        cur = next_shape(cur, layer).map_err(|e| e.in_layer(index, layer.kind()))?;
        shapes.push(cur);
    }
    Ok(shapes)
}

fn maps(shape: ActShape, op: &'static str) -> Result<(usize, usize, usize)> {
    match shape {
        ActShape::Maps { c, h, w } => Ok((c, h, w)),
        ActShape::Flat(d) => Err(Error::shape(op, format!("needs feature maps, got a flat vector of {}", d))),
    }
}

fn next_shape(cur: ActShape, layer: &Layer) -> Result<ActShape> {
    match *layer {
        Layer::Conv {
            out_channels,
            kernel,
            stride,
            padding,
        } => {
            let (_, h, w) = maps(cur, "conv")?;
            if out_channels == 0 || kernel == 0 || stride == 0 {
                return Err(Error::invalid("conv channels, kernel and stride must be positive"));
            }
            match (output_extent(h, kernel, stride, padding), output_extent(w, kernel, stride, padding)) {
                (Some(h), Some(w)) => Ok(ActShape::Maps { c: out_channels, h, w }),
                _ => Err(Error::EmptyOutput {
                    op: "conv",
                    detail: format!("{}x{} kernel over {}x{} maps (padding {})", kernel, kernel, h, w, padding),
                }),
            }
        }
        Layer::MaxPool(pool) => {
            let (c, h, w) = maps(cur, "maxpool")?;
            if pool.stride == 0 {
                return Err(Error::invalid("pool stride must be positive"));
            }
            match (pool.output_extent(h), pool.output_extent(w)) {
                (Some(h), Some(w)) => Ok(ActShape::Maps { c, h, w }),
                _ => Err(Error::EmptyOutput {
                    op: "maxpool",
                    detail: format!(
                        "window {} stride {} padding {} over {}x{} maps",
                        pool.window, pool.stride, pool.padding, h, w
                    ),
                }),
            }
        }
        Layer::GlobalAvgPool => {
            let (c, _, _) = maps(cur, "global_avg_pool")?;
            Ok(ActShape::Maps { c, h: 1, w: 1 })
        }
        Layer::Inception(spec) => {
            spec.validate()?;
            let (_, h, w) = maps(cur, "inception")?;
            Ok(ActShape::Maps {
                c: spec.out_channels(),
                h,
                w,
            })
        }
        Layer::Relu => Ok(cur),
        Layer::Dropout { rate } => {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::invalid(format!("dropout rate {} outside [0, 1)", rate)));
            }
            Ok(cur)
        }
        Layer::Flatten => Ok(ActShape::Flat(cur.elements())),
        Layer::FullyConnected { out_features } => match cur {
            ActShape::Flat(_) if out_features > 0 => Ok(ActShape::Flat(out_features)),
            ActShape::Flat(_) => Err(Error::invalid("fully-connected width must be positive")),
            ActShape::Maps { .. } => Err(Error::shape(
                "fully_connected",
                format!("needs a flat vector, got {:?}; insert a flatten layer", cur),
            )),
        },
        Layer::Softmax => match cur {
            ActShape::Flat(_) => Ok(cur),
            _ => Err(Error::shape("softmax", format!("needs a flat vector, got {:?}", cur))),
        },
    }
}
