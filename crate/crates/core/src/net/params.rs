use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::spec::NetworkSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Weight and bias of one weighted layer, keyed by its layer path.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamEntry<T: Scalar = f32> {
    pub name: String,
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Parameters of a network in spec order plus optimizer velocity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore<T: Scalar = f32> {
    entries: Vec<ParamEntry<T>>,
    velocity: Vec<(Tensor<T>, Tensor<T>)>,
}

impl<T: Scalar> ParamStore<T> {
    pub fn from_entries(entries: Vec<ParamEntry<T>>) -> Self {
        ParamStore {
            entries,
            velocity: Vec::new(),
        }
    }

    /// All-zero parameters laid out for `spec`.
    pub fn zeros(spec: &NetworkSpec) -> Self {
        Self::from_entries(
            spec.param_shapes()
                .into_iter()
                .map(|s| ParamEntry {
                    name: s.name,
                    weight: Tensor::zeros(s.weight),
                    bias: Tensor::zeros([s.bias]),
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[ParamEntry<T>] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [ParamEntry<T>] {
        &mut self.entries
    }

    pub fn get(&self, name: &str) -> Option<&ParamEntry<T>> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Total number of weight and bias elements.
    pub fn element_count(&self) -> usize {
        self.entries.iter().map(|e| e.weight.len() + e.bias.len()).sum()
    }

    /// Velocity tensors, created as zeros on first use.
    pub fn velocity_mut(&mut self) -> (&mut [ParamEntry<T>], &mut [(Tensor<T>, Tensor<T>)]) {
        if self.velocity.len() != self.entries.len() {
            self.velocity = self
                .entries
                .iter()
                .map(|e| {
                    (
                        Tensor::zeros(e.weight.shape().to_vec()),
                        Tensor::zeros(e.bias.shape().to_vec()),
                    )
                })
                .collect();
        }
        (&mut self.entries, &mut self.velocity)
    }

    pub fn reset_velocity(&mut self) {
        self.velocity.clear();
    }

    pub fn cast<U: Scalar>(&self) -> ParamStore<U> {
        ParamStore::from_entries(
            self.entries
                .iter()
                .map(|e| ParamEntry {
                    name: e.name.clone(),
                    weight: e.weight.cast(),
                    bias: e.bias.cast(),
                })
                .collect(),
        )
    }

    /// Parameters without optimizer state; equality on these is bitwise equality of the weights.
    pub fn weights_only(&self) -> Self {
        Self::from_entries(self.entries.clone())
    }

    /// Checks that every entry has the shape `spec` prescribes.
    pub fn check_layout(&self, spec: &NetworkSpec) -> Result<()> {
        let shapes = spec.param_shapes();
        if shapes.len() != self.entries.len() {
            return Err(Error::shape(
                "parameters",
                format!("spec has {} weighted layers, store has {}", shapes.len(), self.entries.len()),
            ));
        }
        for (s, e) in shapes.iter().zip(&self.entries) {
            if e.weight.shape() != s.weight.as_slice() || e.bias.shape() != [s.bias] {
                return Err(Error::shape(
                    "parameters",
                    format!(
                        "{}: expected weight {:?} and bias [{}], got {:?} and {:?}",
                        s.name,
                        s.weight,
                        s.bias,
                        e.weight.shape(),
                        e.bias.shape()
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// He-normal initialization: weights ~ N(0, 2 / fan_in), biases zero.
/// Deterministic for a given seed.
pub fn init_weights(spec: &NetworkSpec, seed: u64) -> ParamStore<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = spec
        .param_shapes()
        .into_iter()
        .map(|s| {
            let fan_in: usize = s.weight[1..].iter().product();
            let normal = Normal::new(0.0f64, libm::sqrt(2.0 / fan_in as f64)).expect("finite std");
            let weight = Tensor::from_fn(s.weight, |_| normal.sample(&mut rng) as f32);
            ParamEntry {
                name: s.name,
                weight,
                bias: Tensor::zeros([s.bias]),
            }
        })
        .collect();
    ParamStore::from_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::spec::{InputShape, Layer};
    use alloc::vec;

    fn wide_fc() -> NetworkSpec {
        NetworkSpec::new(
            InputShape::new(1, 1, 1000),
            vec![Layer::Flatten, Layer::FullyConnected { out_features: 1000 }, Layer::Softmax],
            1000,
        )
        .unwrap()
    }

    #[test]
    fn same_seed_same_store() {
        let spec = wide_fc();
        assert_eq!(init_weights(&spec, 9), init_weights(&spec, 9));
        assert_ne!(init_weights(&spec, 9), init_weights(&spec, 10));
    }

    #[test]
    fn he_variance_and_zero_bias() {
        let store = init_weights(&wide_fc(), 1);
        let w = store.entries()[0].weight.data();
        let mean = w.iter().map(|&v| v as f64).sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / w.len() as f64;
        assert!((var / (2.0 / 1000.0) - 1.0).abs() < 0.1, "variance {}", var);
        assert!(store.entries()[0].bias.data().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn layout_check() {
        let spec = wide_fc();
        let store = init_weights(&spec, 1);
        assert!(store.check_layout(&spec).is_ok());
        assert!(ParamStore::<f32>::default().check_layout(&spec).is_err());
    }
}
