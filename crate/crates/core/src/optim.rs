//! Momentum SGD.

use alloc::format;

use crate::error::{Error, Result};
use crate::net::ParamStore;
use crate::scalar::Scalar;
use crate::tape::Gradients;

/// One heavy-ball step on every entry: `v ← μv − ηg`, `p ← p + v`.
///
/// With `η = 0` and fresh velocity the parameters are left untouched.
pub fn sgd_step<T: Scalar>(params: &mut ParamStore<T>, grads: &Gradients<T>, lr: f64, momentum: f64) -> Result<()> {
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(Error::invalid(format!("learning rate {} must be finite and >= 0", lr)));
    }
    if !(0.0..1.0).contains(&momentum) {
        return Err(Error::invalid(format!("momentum {} outside [0, 1)", momentum)));
    }
    let (entries, velocity) = params.velocity_mut();
    if grads.params.len() != entries.len() {
        return Err(Error::invalid(format!(
            "{} gradients for {} parameter entries",
            grads.params.len(),
            entries.len()
        )));
    }
    let (lr, mu) = (T::from_f64(lr), T::from_f64(momentum));
    for ((entry, (vw, vb)), g) in entries.iter_mut().zip(velocity.iter_mut()).zip(&grads.params) {
        for (p, v, g) in [
            (entry.weight.data_mut(), vw.data_mut(), g.weight.data()),
            (entry.bias.data_mut(), vb.data_mut(), g.bias.data()),
        ] {
            for ((p, v), &g) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                *v = mu * *v - lr * g;
                *p += *v;
            }
        }
    }
    Ok(())
}
