use alloc::format;

use crate::error::{Error, Result};

/// Relative drop in error rate, in percent, going from `baseline` to `new`
/// accuracy (both in percent).
pub fn relative_error_reduction(baseline: f64, new: f64) -> Result<f64> {
    for acc in [baseline, new] {
        if !(0.0..=100.0).contains(&acc) {
            return Err(Error::invalid(format!("accuracy {} outside [0, 100]", acc)));
        }
    }
    if baseline >= 100.0 {
        return Err(Error::invalid("baseline accuracy of 100% has no error to reduce"));
    }
    let (before, after) = (100.0 - baseline, 100.0 - new);
    Ok((before - after) / before * 100.0)
}

pub fn bytes_to_mib(bytes: usize) -> f64 {
    bytes as f64 / (1024.0 * 1024.0)
}
