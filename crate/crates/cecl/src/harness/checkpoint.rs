//! Versioned checkpoint: full training state plus the config that produced
//! it. JSON floats round-trip exactly, so resume is bit-compatible.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::cecl_core::TrainState;
use crate::{CeclError, Result};

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: ExperimentConfig,
    pub state: TrainState,
}

pub fn save_checkpoint(path: &Path, config: &ExperimentConfig, state: &TrainState) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let checkpoint = Checkpoint {
        version: CHECKPOINT_VERSION,
        config: config.clone(),
        state: state.clone(),
    };
    fs::write(path, serde_json::to_string(&checkpoint)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let checkpoint: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    if checkpoint.version != CHECKPOINT_VERSION {
        return Err(CeclError::Input(format!(
            "unsupported checkpoint version {} in {}",
            checkpoint.version,
            path.display()
        )));
    }
    Ok(checkpoint)
}
