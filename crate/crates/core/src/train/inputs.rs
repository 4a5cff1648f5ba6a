use alloc::vec::Vec;

use crate::data::{preprocess, Dataset, PreprocSpec};
use crate::error::Result;
use crate::features::{stack_input, FeatureConfig};
use crate::net::Pipeline;
use crate::tensor::Tensor;

/// Network-ready inputs `[N, C, mask, mask]` with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTensors {
    pub inputs: Tensor<f32>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl LabeledTensors {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows `indices` as a new batch.
    pub fn gather(&self, indices: &[usize]) -> Tensor<f32> {
        let per = if self.is_empty() { 0 } else { self.inputs.len() / self.len() };
        let mut shape = self.inputs.shape().to_vec();
        shape[0] = indices.len();
        let mut data = Vec::with_capacity(per * indices.len());
        for &i in indices {
            data.extend_from_slice(self.inputs.outer(i));
        }
        Tensor::new(shape, data).expect("gathered rows match the batch shape")
    }
}

/// Preprocesses every sample onto a `mask × mask` canvas and stacks the
/// pipeline's feature planes.
pub fn prepare_inputs(dataset: &Dataset, pipeline: Pipeline, mask: usize) -> Result<LabeledTensors> {
    let spec = PreprocSpec::new(pipeline.target, mask);
    let features = FeatureConfig::for_resolution(mask);
    let mut stacks = Vec::with_capacity(dataset.len());
    for sample in &dataset.samples {
        let prepared = preprocess(sample, &spec)?;
        stacks.push(stack_input(&prepared.image, pipeline.mode, &features)?.planes);
    }
    let inputs = if stacks.is_empty() {
        Tensor::zeros([0, pipeline.mode.channels(), mask, mask])
    } else {
        let refs: Vec<&Tensor<f32>> = stacks.iter().collect();
        Tensor::stack(&refs)?
    };
    Ok(LabeledTensors {
        inputs,
        labels: dataset.labels(),
        class_count: dataset.class_count(),
    })
}
