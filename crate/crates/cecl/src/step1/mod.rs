//! Step 1: clean-example identification and coarse labeling.
//!
//! A pair of classifiers trains co-teaching style: each network picks its
//! smallest-loss fraction of every batch and its peer trains on that pick,
//! with the kept fraction ramping down toward `1 - estimated_noise_rate`.
//! After each epoch the ensemble's prediction per example is recorded; the
//! correction record flags every example whose confident prediction
//! contradicted its given label after a burn-in. Flagged examples form the
//! noisy partition and are re-labeled with the ensemble argmax; the rest keep
//! their given labels. Ground truth is never consulted.

mod artifact;
mod partition;
mod warmup;

pub use artifact::{load_step1_artifact, save_step1_artifact, Step1Artifact};
pub use partition::{
    partition_and_relabel, update_correction_record, CoarseLabeledDataset, CorrectionRecord,
};
pub use warmup::{warmup_train, Step1Config, WarmupOutcome};

use serde::{Deserialize, Serialize};

/// One epoch-end prediction for one example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochPrediction {
    pub pred: usize,
    /// Max posterior; predictions below the confidence threshold are treated
    /// as agreement-neutral when the record is built.
    pub confidence: f64,
}

/// Epoch-by-example prediction log from the warmup, alongside the given
/// labels it is judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementHistory {
    pub given: Vec<usize>,
    pub epochs: Vec<Vec<EpochPrediction>>,
}
