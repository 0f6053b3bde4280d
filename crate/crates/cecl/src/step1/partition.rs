//! Correction record and the clean/noisy partition with coarse labels.

use serde::{Deserialize, Serialize};

use super::warmup::ensemble_posterior;
use super::AgreementHistory;
use crate::datagen::NoisyDataset;
use crate::encoder::{Mlp, Partition};
use crate::vecmath::argmax;
use crate::{CeclError, Result};

/// Per-example mislabel flags. `true` means the model's confident prediction
/// contradicted the given label at least once after burn-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRecord {
    pub mislabeled: Vec<bool>,
    pub burnin_epochs: usize,
}

/// Derive the correction record from a warmup history.
///
/// A prediction participates only when its confidence reaches
/// `confidence_threshold`; below that it is agreement-neutral. The first
/// `burnin_fraction` of recorded epochs is ignored. Flags are sticky: one
/// post-burn-in contradiction marks the example mislabeled.
pub fn update_correction_record(
    history: &AgreementHistory,
    confidence_threshold: f64,
    burnin_fraction: f64,
) -> Result<CorrectionRecord> {
    if history.epochs.is_empty() {
        return Err(CeclError::Input("empty agreement history".into()));
    }
    let n = history.given.len();
    for (e, preds) in history.epochs.iter().enumerate() {
        if preds.len() != n {
            return Err(CeclError::Input(format!(
                "history epoch {e} has {} entries, expected {n}",
                preds.len()
            )));
        }
    }
    let burnin_epochs = (burnin_fraction * history.epochs.len() as f64).floor() as usize;
    let mut mislabeled = vec![false; n];
    for preds in history.epochs.iter().skip(burnin_epochs) {
        for (i, p) in preds.iter().enumerate() {
            if p.confidence >= confidence_threshold && p.pred != history.given[i] {
                mislabeled[i] = true;
            }
        }
    }
    Ok(CorrectionRecord {
        mislabeled,
        burnin_epochs,
    })
}

/// Step-1 output: partition tag and coarse label per example, index-aligned
/// with the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseLabeledDataset {
    pub partition: Vec<Partition>,
    pub y_prime: Vec<usize>,
}

impl CoarseLabeledDataset {
    pub fn clean_count(&self) -> usize {
        self.partition.iter().filter(|p| **p == Partition::Clean).count()
    }

    pub fn noisy_count(&self) -> usize {
        self.partition.len() - self.clean_count()
    }
}

/// Clean examples keep their given labels; flagged examples are re-labeled
/// with the ensemble's argmax class.
pub fn partition_and_relabel(
    dataset: &NoisyDataset,
    record: &CorrectionRecord,
    net_a: &Mlp,
    net_b: &Mlp,
) -> Result<CoarseLabeledDataset> {
    if record.mislabeled.len() != dataset.examples.len() {
        return Err(CeclError::Input(format!(
            "correction record covers {} examples, dataset has {}",
            record.mislabeled.len(),
            dataset.examples.len()
        )));
    }
    let mut partition = Vec::with_capacity(dataset.examples.len());
    let mut y_prime = Vec::with_capacity(dataset.examples.len());
    for (ex, &flagged) in dataset.examples.iter().zip(&record.mislabeled) {
        if flagged {
            partition.push(Partition::Noisy);
            y_prime.push(argmax(&ensemble_posterior(net_a, net_b, &ex.feature)?));
        } else {
            partition.push(Partition::Clean);
            y_prime.push(ex.given);
        }
    }
    Ok(CoarseLabeledDataset { partition, y_prime })
}
