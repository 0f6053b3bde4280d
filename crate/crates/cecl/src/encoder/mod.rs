//! Encoder/classifier pair with momentum key network and embedding queue.
//!
//! The query network is a small MLP trunk with two heads: a linear classifier
//! over the known classes and a projection head whose output is L2-normalized
//! into the contrastive embedding. The key network is a momentum copy of the
//! query network and never receives gradients; neither do queue entries.

mod mlp;
mod optimizer;
mod pool;
mod queue;
mod views;

pub use mlp::{Forward, Linear, Mlp, MlpConfig, MlpGrads};
pub use optimizer::{cosine_lr, SgdMomentum};
pub use pool::{build_pool, Pool, PoolEntry, PoolSource};
pub use queue::{MomentumQueue, QueueEntry};
pub use views::{forward_views, AugmentationSpec, RecordMeta, ViewForward};

use serde::{Deserialize, Serialize};

/// Step-1 verdict carried by every example through step 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Clean,
    Noisy,
}

/// Normalized query/key embedding pair plus the metadata the contrastive
/// machinery selects on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub q: Vec<f64>,
    pub k: Vec<f64>,
    pub y_prime: usize,
    pub partition: Partition,
    pub example_id: usize,
}

/// Max tolerated deviation from unit norm for stored embeddings.
pub const UNIT_NORM_TOL: f64 = 1e-6;
