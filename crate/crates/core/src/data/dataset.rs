use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// A labeled character image.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: GrayImage,
    pub label: usize,
    pub class_name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    #[default]
    All,
    Train,
    Test,
}

/// Ordered samples with a dense class table (`class_names[label]`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    class_names: Vec<String>,
    index: BTreeMap<String, usize>,
    pub split: Split,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Empty dataset with a fixed class table.
    pub fn with_classes(names: impl IntoIterator<Item = String>) -> Self {
        let mut ds = Self::new();
        for name in names {
            ds.class_index_or_insert(&name);
        }
        ds
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Index of `name`, appending it to the class table when unseen.
    pub fn class_index_or_insert(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.class_names.len();
        self.class_names.push(String::from(name));
        self.index.insert(String::from(name), i);
        i
    }

    pub fn push(&mut self, image: GrayImage, class_name: &str) -> usize {
        let label = self.class_index_or_insert(class_name);
        self.samples.push(Sample {
            image,
            label,
            class_name: String::from(class_name),
        });
        label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn class_histogram(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.class_count()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    fn subset(&self, indices: &[usize], split: Split) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            class_names: self.class_names.clone(),
            index: self.index.clone(),
            split,
        }
    }
}

/// Stratified shuffle: each class keeps `round(fraction · n_c)` samples for
/// training (at least one on each side), then both sides are shuffled.
pub fn shuffle_split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction {} outside (0, 1)", train_fraction)));
    }
    let mut by_class: Vec<Vec<usize>> = alloc::vec![Vec::new(); dataset.class_count()];
    for (i, s) in dataset.samples.iter().enumerate() {
        by_class[s.label].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, members) in by_class.iter_mut().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::invalid(format!(
                "class {:?} has {} sample(s); at least 2 are needed to split",
                dataset.class_names()[label],
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let k = (libm::round(members.len() as f64 * train_fraction) as usize).clamp(1, members.len() - 1);
        train.extend_from_slice(&members[..k]);
        test.extend_from_slice(&members[k..]);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((dataset.subset(&train, Split::Train), dataset.subset(&test, Split::Test)))
}
