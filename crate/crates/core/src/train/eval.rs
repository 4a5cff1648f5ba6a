use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::inputs::LabeledTensors;
use crate::error::{Error, Result};
use crate::net::{predict, serialized_size_report, NetworkSpec, ParamStore};
use crate::ops::cross_entropy;
use crate::tensor::Tensor;

/// The k values every report carries.
pub const REPORT_KS: [usize; 4] = [1, 2, 5, 10];

const EVAL_BATCH: usize = 128;

/// Top-k accuracies in percent plus model size figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub top1: f64,
    pub top2: f64,
    pub top5: f64,
    pub top10: f64,
    pub mean_loss: f64,
    pub samples: usize,
    pub parameters: usize,
    pub bytes: usize,
}

impl EvalReport {
    pub fn topk(&self) -> [f64; 4] {
        [self.top1, self.top2, self.top5, self.top10]
    }

    /// One `key=value` pair per line.
    pub fn to_key_value(&self) -> String {
        format!(
            "top1={:.4}\ntop2={:.4}\ntop5={:.4}\ntop10={:.4}\nmean_loss={:.6}\nsamples={}\nparameters={}\nbytes={}\n",
            self.top1, self.top2, self.top5, self.top10, self.mean_loss, self.samples, self.parameters, self.bytes
        )
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8} {:>8} {:>8} {:>8} {:>10} {:>8} {:>11} {:>10}", "Top1", "Top2", "Top5", "Top10", "loss", "samples", "params", "MiB")?;
        write!(
            f,
            "{:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>10.4} {:>8} {:>11} {:>10.2}",
            self.top1,
            self.top2,
            self.top5,
            self.top10,
            self.mean_loss,
            self.samples,
            self.parameters,
            super::bytes_to_mib(self.bytes)
        )
    }
}

/// Position of `label` when classes are sorted by descending probability,
/// ties going to the lower class index. Rank 0 is the top prediction.
pub fn rank_of(row: &[f32], label: usize) -> usize {
    let p = row[label];
    row.iter()
        .enumerate()
        .filter(|&(j, &q)| q > p || (q == p && j < label))
        .count()
}

/// Inference in fixed-size chunks; rows are independent so the result does
/// not depend on the chunk size.
pub fn predict_batched(spec: &NetworkSpec, params: &ParamStore<f32>, inputs: &Tensor<f32>) -> Result<Tensor<f32>> {
    let n = inputs.shape().first().copied().unwrap_or(0);
    let t = spec.class_count();
    let mut out = Vec::with_capacity(n * t);
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_BATCH).min(n);
        let mut shape = inputs.shape().to_vec();
        shape[0] = end - start;
        let per = inputs.len() / n;
        let chunk = Tensor::new(shape, inputs.data()[start * per..end * per].to_vec())?;
        out.extend_from_slice(predict(spec, params, chunk)?.data());
        start = end;
    }
    Tensor::new([n, t], out)
}

/// Top-k report from precomputed class probabilities.
pub fn evaluate_probs(probs: &Tensor<f32>, labels: &[usize], spec: &NetworkSpec) -> Result<EvalReport> {
    let (n, t) = probs.dims2("evaluate")?;
    if n != labels.len() {
        return Err(Error::shape("evaluate", format!("{} rows for {} labels", n, labels.len())));
    }
    if n == 0 {
        return Err(Error::invalid("cannot evaluate on zero samples"));
    }
    let mut hits = [0usize; 4];
    for (i, &y) in labels.iter().enumerate() {
        if y >= t {
            return Err(Error::LabelOutOfRange { label: y, classes: t });
        }
        let rank = rank_of(probs.outer(i), y);
        for (h, &k) in hits.iter_mut().zip(&REPORT_KS) {
            if rank < k {
                *h += 1;
            }
        }
    }
    for k in REPORT_KS {
        if k > t {
            log::warn!("top-{} requested with {} classes; reported as 100%", k, t);
        }
    }
    let pct = |h: usize| h as f64 / n as f64 * 100.0;
    let size = serialized_size_report(spec);
    Ok(EvalReport {
        top1: pct(hits[0]),
        top2: pct(hits[1]),
        top5: pct(hits[2]),
        top10: pct(hits[3]),
        mean_loss: cross_entropy(probs, labels)? as f64,
        samples: n,
        parameters: size.parameters,
        bytes: size.bytes,
    })
}

pub fn evaluate_topk(spec: &NetworkSpec, params: &ParamStore<f32>, data: &LabeledTensors) -> Result<EvalReport> {
    let probs = predict_batched(spec, params, &data.inputs)?;
    evaluate_probs(&probs, &data.labels, spec)
}
