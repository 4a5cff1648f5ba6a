//! Binary model format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "HCRM" | u32 version | u32 class count | u32 spec length | spec bytes | f32 parameters
//! ```
//!
//! The network description holds the input shape, the input mode code, the
//! preprocessing target size, the layer count and one `u8` tag plus `u32`
//! fields per layer. Parameters follow in spec order, weight then bias for
//! each weighted entry. The total size is a function of the architecture alone.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::params::{ParamEntry, ParamStore};
use super::spec::{InceptionSpec, InputShape, Layer, NetworkSpec};
use crate::error::{Error, Result};
use crate::features::InputMode;
use crate::ops::PoolParams;
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"HCRM";
pub const VERSION: u32 = 1;
/// Magic, version, class count and spec length.
pub const FIXED_HEADER: usize = 16;

const TAG_CONV: u8 = 1;
const TAG_RELU: u8 = 2;
const TAG_MAXPOOL: u8 = 3;
const TAG_GAP: u8 = 4;
const TAG_DROPOUT: u8 = 5;
const TAG_INCEPTION: u8 = 6;
const TAG_FLATTEN: u8 = 7;
const TAG_FC: u8 = 8;
const TAG_SOFTMAX: u8 = 9;

/// How raw images become network input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pipeline {
    pub mode: InputMode,
    /// Character size before mask placement; the mask is the input height.
    pub target: usize,
}

/// A network, its input pipeline and trained parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: NetworkSpec,
    pub pipeline: Pipeline,
    pub params: ParamStore<f32>,
}

/// Parameter count and projected file size of a spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeReport {
    pub parameters: usize,
    pub bytes: usize,
}

impl SizeReport {
    pub fn weight_bytes(&self) -> usize {
        4 * self.parameters
    }

    pub fn mib(&self) -> f64 {
        self.bytes as f64 / (1024.0 * 1024.0)
    }
}

fn layer_field_count(layer: &Layer) -> usize {
    match layer {
        Layer::Conv { .. } => 4,
        Layer::MaxPool(_) => 3,
        Layer::Dropout { .. } | Layer::FullyConnected { .. } => 1,
        Layer::Inception(_) => 6,
        Layer::Relu | Layer::GlobalAvgPool | Layer::Flatten | Layer::Softmax => 0,
    }
}

/// Length of the network description section.
pub fn spec_len(spec: &NetworkSpec) -> usize {
    24 + spec.layers().iter().map(|l| 1 + 4 * layer_field_count(l)).sum::<usize>()
}

/// Exact byte size of an encoded model with this spec.
pub fn serialized_size_report(spec: &NetworkSpec) -> SizeReport {
    let parameters = spec.count_parameters();
    SizeReport {
        parameters,
        bytes: FIXED_HEADER + spec_len(spec) + 4 * parameters,
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::invalid(format!("{} does not fit a u32 field", v)))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn encode_layer(out: &mut Vec<u8>, layer: &Layer) -> Result<()> {
    match *layer {
        Layer::Conv {
            out_channels,
            kernel,
            stride,
            padding,
        } => {
            out.push(TAG_CONV);
            for v in [out_channels, kernel, stride, padding] {
                put_u32(out, v)?;
            }
        }
        Layer::Relu => out.push(TAG_RELU),
        Layer::MaxPool(p) => {
            out.push(TAG_MAXPOOL);
            for v in [p.window, p.stride, p.padding] {
                put_u32(out, v)?;
            }
        }
        Layer::GlobalAvgPool => out.push(TAG_GAP),
        Layer::Dropout { rate } => {
            out.push(TAG_DROPOUT);
            out.extend_from_slice(&rate.to_bits().to_le_bytes());
        }
        Layer::Inception(s) => {
            out.push(TAG_INCEPTION);
            for v in [s.c1, s.r3, s.c3, s.r5, s.c5, s.pp] {
                put_u32(out, v)?;
            }
        }
        Layer::Flatten => out.push(TAG_FLATTEN),
        Layer::FullyConnected { out_features } => {
            out.push(TAG_FC);
            put_u32(out, out_features)?;
        }
        Layer::Softmax => out.push(TAG_SOFTMAX),
    }
    Ok(())
}

/// Serializes a model. The result is exactly
/// `serialized_size_report(&model.spec).bytes` long.
pub fn encode_model(model: &Model) -> Result<Vec<u8>> {
    model.params.check_layout(&model.spec)?;
    let spec = &model.spec;
    let report = serialized_size_report(spec);
    let mut out = Vec::with_capacity(report.bytes);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION as usize)?;
    put_u32(&mut out, spec.class_count())?;
    put_u32(&mut out, spec_len(spec))?;
    let input = spec.input();
    for v in [
        input.channels,
        input.height,
        input.width,
        model.pipeline.mode.code() as usize,
        model.pipeline.target,
        spec.layers().len(),
    ] {
        put_u32(&mut out, v)?;
    }
    for layer in spec.layers() {
        encode_layer(&mut out, layer)?;
    }
    for entry in model.params.entries() {
        for v in entry.weight.data().iter().chain(entry.bias.data()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    debug_assert_eq!(out.len(), report.bytes);
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail(&self, detail: impl Into<String>) -> Error {
        Error::Decode {
            offset: self.pos,
            detail: detail.into(),
        }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.fail(format!(
                "truncated {}: need {} bytes, {} left",
                what,
                n,
                self.bytes.len() - self.pos
            ))),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        Ok(self.u32(what)? as usize)
    }
}

fn decode_layer(r: &mut Reader) -> Result<Layer> {
    let at = r.pos;
    let tag = r.u8("layer tag")?;
    Ok(match tag {
        TAG_CONV => Layer::Conv {
            out_channels: r.usize("conv")?,
            kernel: r.usize("conv")?,
            stride: r.usize("conv")?,
            padding: r.usize("conv")?,
        },
        TAG_RELU => Layer::Relu,
        TAG_MAXPOOL => Layer::MaxPool(PoolParams::new(r.usize("pool")?, r.usize("pool")?, r.usize("pool")?)),
        TAG_GAP => Layer::GlobalAvgPool,
        TAG_DROPOUT => Layer::Dropout {
            rate: f32::from_bits(r.u32("dropout")?),
        },
        TAG_INCEPTION => {
            let mut f = [0usize; 6];
            for v in &mut f {
                *v = r.usize("inception")?;
            }
            Layer::Inception(InceptionSpec::new(f[0], f[1], f[2], f[3], f[4], f[5]))
        }
        TAG_FLATTEN => Layer::Flatten,
        TAG_FC => Layer::FullyConnected {
            out_features: r.usize("fully_connected")?,
        },
        TAG_SOFTMAX => Layer::Softmax,
        other => {
            return Err(Error::Decode {
                offset: at,
                detail: format!("unknown layer tag {}", other),
            })
        }
    })
}

/// Parses an encoded model, validating the network description and the weight section length.
pub fn decode_model(bytes: &[u8]) -> Result<Model> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Decode {
            offset: 0,
            detail: String::from("bad magic, expected \"HCRM\""),
        });
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Decode {
            offset: 4,
            detail: format!("unsupported version {}", version),
        });
    }
    let class_count = r.usize("class count")?;
    let declared_len = r.usize("spec length")?;
    let spec_start = r.pos;
    let input = InputShape::new(r.usize("input")?, r.usize("input")?, r.usize("input")?);
    let mode_at = r.pos;
    let mode = InputMode::from_code(r.u32("input mode")?).ok_or_else(|| Error::Decode {
        offset: mode_at,
        detail: String::from("unknown input mode code"),
    })?;
    let target = r.usize("target size")?;
    let layer_count = r.usize("layer count")?;
    let mut layers = Vec::new();
    for _ in 0..layer_count {
        layers.push(decode_layer(&mut r)?);
    }
    if r.pos - spec_start != declared_len {
        return Err(r.fail(format!(
            "network section is {} bytes, header declares {}",
            r.pos - spec_start,
            declared_len
        )));
    }
    let spec = NetworkSpec::new(input, layers, class_count).map_err(|e| Error::Decode {
        offset: spec_start,
        detail: format!("invalid spec: {}", e),
    })?;
    let expected = 4 * spec.count_parameters();
    let remaining = bytes.len() - r.pos;
    if remaining != expected {
        return Err(r.fail(format!(
            "weight section is {} bytes, expected {}",
            remaining, expected
        )));
    }
    let mut entries = Vec::new();
    for shape in spec.param_shapes() {
        let mut read = |dims: &[usize]| -> Result<Tensor<f32>> {
            let n: usize = dims.iter().product();
            let raw = r.take(4 * n, "weights")?;
            let data = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            Tensor::new(dims.to_vec(), data)
        };
        let weight = read(&shape.weight)?;
        let bias = read(&[shape.bias])?;
        entries.push(ParamEntry {
            name: shape.name.clone(),
            weight,
            bias,
        });
    }
    Ok(Model {
        spec,
        pipeline: Pipeline { mode, target },
        params: ParamStore::from_entries(entries),
    })
}
