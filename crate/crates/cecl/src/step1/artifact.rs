//! Versioned step-1 artifact file, consumed verbatim by step 2.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AgreementHistory, CoarseLabeledDataset, CorrectionRecord};
use crate::{CeclError, Result};

const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step1Artifact {
    pub version: u32,
    pub coarse: CoarseLabeledDataset,
    pub record: CorrectionRecord,
    pub history: AgreementHistory,
}

impl Step1Artifact {
    pub fn new(
        coarse: CoarseLabeledDataset,
        record: CorrectionRecord,
        history: AgreementHistory,
    ) -> Self {
        Step1Artifact {
            version: ARTIFACT_VERSION,
            coarse,
            record,
            history,
        }
    }
}

pub fn save_step1_artifact(artifact: &Step1Artifact, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string(artifact)?)?;
    Ok(())
}

pub fn load_step1_artifact(path: &Path) -> Result<Step1Artifact> {
    let artifact: Step1Artifact = serde_json::from_str(&fs::read_to_string(path)?)?;
    if artifact.version != ARTIFACT_VERSION {
        return Err(CeclError::Input(format!(
            "unsupported step-1 artifact version {} in {}",
            artifact.version,
            path.display()
        )));
    }
    let n = artifact.coarse.partition.len();
    if artifact.coarse.y_prime.len() != n || artifact.record.mislabeled.len() != n {
        return Err(CeclError::Input(
            "step-1 artifact fields disagree on example count".into(),
        ));
    }
    Ok(artifact)
}
