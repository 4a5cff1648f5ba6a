use alloc::format;
use alloc::vec::Vec;

use super::eval::predict_batched;
use crate::error::{Error, Result};
use crate::net::{NetworkSpec, ParamStore};
use crate::tensor::Tensor;

/// Elementwise mean of member probability tables. Sums run in f64, so
/// averaging identical members returns the member unchanged.
pub fn ensemble_average(outputs: &[Tensor<f32>]) -> Result<Tensor<f32>> {
    let first = outputs.first().ok_or_else(|| Error::invalid("ensemble needs at least one member"))?;
    for (i, o) in outputs.iter().enumerate() {
        if o.shape() != first.shape() {
            return Err(Error::shape(
                "ensemble",
                format!("member {} outputs {:?}, member 0 outputs {:?}", i, o.shape(), first.shape()),
            ));
        }
    }
    let k = outputs.len() as f64;
    let data = (0..first.len())
        .map(|j| (outputs.iter().map(|o| o.data()[j] as f64).sum::<f64>() / k) as f32)
        .collect();
    Tensor::new(first.shape().to_vec(), data)
}

/// Runs each member on its own input (members may use different feature
/// modes) and averages their probabilities.
pub fn ensemble_predict(members: &[(&NetworkSpec, &ParamStore<f32>)], inputs: &[&Tensor<f32>]) -> Result<Tensor<f32>> {
    if members.len() != inputs.len() {
        return Err(Error::invalid(format!("{} members but {} inputs", members.len(), inputs.len())));
    }
    let classes = members
        .first()
        .ok_or_else(|| Error::invalid("ensemble needs at least one member"))?
        .0
        .class_count();
    let mut outputs = Vec::with_capacity(members.len());
    for (i, (&(spec, params), input)) in members.iter().zip(inputs).enumerate() {
        if spec.class_count() != classes {
            return Err(Error::invalid(format!(
                "member {} has {} classes, member 0 has {}",
                i,
                spec.class_count(),
                classes
            )));
        }
        outputs.push(predict_batched(spec, params, input)?);
    }
    ensemble_average(&outputs)
}
