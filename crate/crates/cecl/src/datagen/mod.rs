//! Synthetic corpora and controlled label-noise construction.
//!
//! A [`CleanCorpus`] holds uncorrupted train/test examples over `C_total`
//! classes. [`build_open_set_noise`] selects `c` known classes, corrupts
//! known-class labels with symmetric or asymmetric noise, and mixes in
//! unknown-class examples that carry known-class given labels, producing a
//! [`NoisyDataset`] whose hidden truth reserves index `c` for the open set.

mod blobs;
mod noise;
mod store;

pub use blobs::{make_synthetic_blobs, BlobLayout, BlobSpec, OverlapPair};
pub use noise::{
    build_open_set_noise, cyclic_pair_map, inject_asymmetric_noise, inject_symmetric_noise,
    split_class_ids, split_known_unknown, ClassSplit, NoiseKind, NoiseSpec, OpenSetLabeling,
};
pub use store::{load_dataset, save_dataset};

use serde::{Deserialize, Serialize};

/// Uncorrupted example: feature vector plus its true class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanExample {
    pub feature: Vec<f64>,
    pub label: usize,
}

/// Source corpus before any noise. Train and test are drawn separately, so
/// their index sets are disjoint by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanCorpus {
    pub class_count: usize,
    pub dim: usize,
    pub train: Vec<CleanExample>,
    pub test: Vec<CleanExample>,
}

impl CleanCorpus {
    pub fn validate(&self) -> crate::Result<()> {
        for ex in self.train.iter().chain(self.test.iter()) {
            if ex.label >= self.class_count {
                return Err(crate::CeclError::Input(format!(
                    "label {} out of range for {} classes",
                    ex.label, self.class_count
                )));
            }
            if ex.feature.len() != self.dim {
                return Err(crate::CeclError::Input(format!(
                    "feature dim {} != corpus dim {}",
                    ex.feature.len(),
                    self.dim
                )));
            }
        }
        Ok(())
    }
}

/// A training example after noise construction.
///
/// `given` indexes the `c` known classes (remapped to 0..c). `truth` indexes
/// `c + 1` classes, where `truth == c` marks an open-set example. Injectors
/// never touch `truth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyExample {
    pub id: usize,
    pub feature: Vec<f64>,
    pub given: usize,
    pub truth: usize,
}

/// Clean, closed-set evaluation example (labels remapped to 0..c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestExample {
    pub feature: Vec<f64>,
    pub label: usize,
}

/// Everything needed to reproduce a dataset bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProvenance {
    pub spec: NoiseSpec,
    pub split: ClassSplit,
    /// Original corpus class ids, indexed by remapped known label.
    pub known_label_map: Vec<usize>,
}

/// Open-set noisy training set plus its clean closed-set test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyDataset {
    pub examples: Vec<NoisyExample>,
    pub known_class_count: usize,
    pub dim: usize,
    pub test: Vec<TestExample>,
    pub provenance: DatasetProvenance,
}

impl NoisyDataset {
    /// The open-set sentinel value used in `truth`.
    pub fn open_set_class(&self) -> usize {
        self.known_class_count
    }

    pub fn open_set_count(&self) -> usize {
        self.examples
            .iter()
            .filter(|e| e.truth == self.known_class_count)
            .count()
    }
}
