//! Central-difference verification of the backward pass in f64.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::forward::record_forward;
use super::params::ParamStore;
use super::spec::NetworkSpec;
use crate::error::Result;
use crate::ops::Mode;
use crate::tape::{Gradients, Tape};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub epsilon: f64,
    pub tolerance: f64,
    /// Parameter coordinates to probe (all of them when the network has fewer).
    pub samples: usize,
    /// Input coordinates to probe in addition.
    pub input_samples: usize,
    pub seed: u64,
    /// Train mode replays the same dropout masks for every evaluation.
    pub mode: Mode,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            epsilon: 1e-5,
            tolerance: 1e-4,
            samples: 128,
            input_samples: 16,
            seed: 0,
            mode: Mode::Infer,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Parameter name (or `input`) and flat index of the worst coordinate.
    pub worst: (String, usize),
    pub checked: usize,
    pub passed: bool,
}

/// Tape gradients of the mean cross-entropy: per-parameter plus the input gradient.
pub fn analytic_gradients(
    spec: &NetworkSpec,
    params: &ParamStore<f64>,
    input: &Tensor<f64>,
    labels: &[usize],
    cfg: &GradCheckConfig,
) -> Result<(Gradients<f64>, Tensor<f64>)> {
    params.check_layout(spec)?;
    let mut tape = Tape::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x = tape.input(input.clone());
    let probs = record_forward(spec, &mut tape, x, cfg.mode, &mut rng)?;
    tape.cross_entropy(probs, labels)?;
    let grads = tape.backward(1.0)?;
    let input_grad = grads
        .value(x)
        .cloned()
        .unwrap_or_else(|| Tensor::zeros(input.shape().to_vec()));
    Ok((grads, input_grad))
}

fn loss(
    spec: &NetworkSpec,
    params: &ParamStore<f64>,
    input: &Tensor<f64>,
    labels: &[usize],
    cfg: &GradCheckConfig,
) -> Result<f64> {
    let mut tape = Tape::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x = tape.input(input.clone());
    let probs = record_forward(spec, &mut tape, x, cfg.mode, &mut rng)?;
    Ok(tape.cross_entropy(probs, labels)?.1)
}

/// Compares the tape's gradients with central differences on a random subset of coordinates.
pub fn grad_check(
    spec: &NetworkSpec,
    params: &ParamStore<f64>,
    input: &Tensor<f64>,
    labels: &[usize],
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport> {
    let (grads, input_grad) = analytic_gradients(spec, params, input, labels, cfg)?;
    grad_check_against(spec, params, input, labels, cfg, &grads, &input_grad)
}

fn coord(p: &mut ParamStore<f64>, entry: usize, local: usize) -> &mut f64 {
    let e = &mut p.entries_mut()[entry];
    let wlen = e.weight.len();
    if local < wlen {
        &mut e.weight.data_mut()[local]
    } else {
        &mut e.bias.data_mut()[local - wlen]
    }
}

fn analytic_at(grads: &Gradients<f64>, entry: usize, local: usize) -> f64 {
    let g = &grads.params[entry];
    let wlen = g.weight.len();
    if local < wlen {
        g.weight.data()[local]
    } else {
        g.bias.data()[local - wlen]
    }
}

/// Same as [`grad_check`] but with caller-supplied analytic gradients.
pub fn grad_check_against(
    spec: &NetworkSpec,
    params: &ParamStore<f64>,
    input: &Tensor<f64>,
    labels: &[usize],
    cfg: &GradCheckConfig,
    grads: &Gradients<f64>,
    input_grad: &Tensor<f64>,
) -> Result<GradCheckReport> {
    // Flat coordinate space: for each entry, weights then bias.
    let mut offsets = Vec::with_capacity(params.entries().len());
    let mut total = 0;
    for e in params.entries() {
        offsets.push(total);
        total += e.weight.len() + e.bias.len();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let picks: Vec<usize> = if total <= cfg.samples {
        (0..total).collect()
    } else {
        let mut v = sample(&mut rng, total, cfg.samples).into_vec();
        v.sort_unstable();
        v
    };

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: (String::new(), 0),
        checked: 0,
        passed: true,
    };
    let mut record = |name: &str, index: usize, analytic: f64, numeric: f64| {
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
        report.checked += 1;
        if report.checked == 1 || rel > report.max_relative_error {
            report.max_relative_error = rel;
            report.worst = (String::from(name), index);
        }
    };
    let central = |plus: f64, minus: f64| (plus - minus) / (2.0 * cfg.epsilon);

    let mut probe = params.clone();
    for &flat in &picks {
        let entry = offsets.partition_point(|&o| o <= flat) - 1;
        let local = flat - offsets[entry];
        let original = *coord(&mut probe, entry, local);
        *coord(&mut probe, entry, local) = original + cfg.epsilon;
        let plus = loss(spec, &probe, input, labels, cfg)?;
        *coord(&mut probe, entry, local) = original - cfg.epsilon;
        let minus = loss(spec, &probe, input, labels, cfg)?;
        *coord(&mut probe, entry, local) = original;
        record(
            &params.entries()[entry].name,
            local,
            analytic_at(grads, entry, local),
            central(plus, minus),
        );
    }

    let mut probe_in = input.clone();
    for i in sample(&mut rng, input.len(), cfg.input_samples.min(input.len())) {
        let original = probe_in.data()[i];
        probe_in.data_mut()[i] = original + cfg.epsilon;
        let plus = loss(spec, params, &probe_in, labels, cfg)?;
        probe_in.data_mut()[i] = original - cfg.epsilon;
        let minus = loss(spec, params, &probe_in, labels, cfg)?;
        probe_in.data_mut()[i] = original;
        record("input", i, input_grad.data()[i], central(plus, minus));
    }

    report.passed = report.max_relative_error < cfg.tolerance;
    Ok(report)
}
