use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Row-wise softmax of `[N,T]` logits with max subtraction.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    let (_, t) = logits.dims2("softmax")?;
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.data().chunks(t) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let start = out.len();
        let mut total = T::zero();
        for &z in row {
            let e = (z - max).exp();
            total += e;
            out.push(e);
        }
        for p in &mut out[start..] {
            *p /= total;
        }
    }
    Tensor::new(logits.shape().to_vec(), out)
}

fn check_labels<T: Scalar>(probs: &Tensor<T>, labels: &[usize], op: &'static str) -> Result<(usize, usize)> {
    let (n, t) = probs.dims2(op)?;
    if labels.len() != n {
        return Err(Error::shape(op, format!("{} labels for {} rows", labels.len(), n)));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= t) {
        return Err(Error::LabelOutOfRange { label, classes: t });
    }
    Ok((n, t))
}

/// `−(1/N) Σ_i ln p_i[y_i]`. Probabilities are floored at the smallest
/// positive normal so the loss stays finite.
pub fn cross_entropy<T: Scalar>(probs: &Tensor<T>, labels: &[usize]) -> Result<T> {
    let (n, t) = check_labels(probs, labels, "cross_entropy")?;
    let floor = T::min_positive_value();
    let total: T = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| -probs.data()[i * t + y].max(floor).ln())
        .sum();
    Ok(total / T::from_f64(n as f64))
}

/// Gradient of `cross_entropy(softmax(z))` with respect to the logits `z`: `(p − onehot) / N`.
pub fn softmax_cross_entropy_grad<T: Scalar>(probs: &Tensor<T>, labels: &[usize]) -> Result<Tensor<T>> {
    let (n, t) = check_labels(probs, labels, "cross_entropy backward")?;
    let scale = T::one() / T::from_f64(n as f64);
    let mut g = probs.clone();
    for (row, &y) in g.data_mut().chunks_mut(t).zip(labels) {
        row[y] -= T::one();
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    Ok(g)
}
