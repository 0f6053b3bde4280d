//! Query/key view generation with seed-reproducible augmentation.

use serde::{Deserialize, Serialize};

use super::{mlp::Forward, EmbeddingRecord, Mlp, Partition};
use crate::rng::Rng;
use crate::Result;

/// Gaussian feature jitter; `jitter_std == 0` disables augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub jitter_std: f64,
}

impl AugmentationSpec {
    pub fn apply(&self, x: &[f64], rng: &mut Rng) -> Vec<f64> {
        if self.jitter_std == 0.0 {
            return x.to_vec();
        }
        x.iter().map(|&v| v + self.jitter_std * rng.normal()).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RecordMeta {
    pub y_prime: usize,
    pub partition: Partition,
    pub example_id: usize,
}

/// One example's views plus what backward needs later: the query forward
/// cache and the augmented input it was computed on.
#[derive(Debug, Clone)]
pub struct ViewForward {
    pub record: EmbeddingRecord,
    pub query_forward: Forward,
    pub aug_q: Vec<f64>,
}

/// Runs the query view through the query network and the key view through
/// the key network. The key embedding is a stop-gradient constant from here
/// on; only `query_forward` participates in backprop.
pub fn forward_views(
    query: &Mlp,
    key: &Mlp,
    x: &[f64],
    aug: &AugmentationSpec,
    rng: &mut Rng,
    meta: RecordMeta,
) -> Result<ViewForward> {
    let aug_q = aug.apply(x, rng);
    let aug_k = aug.apply(x, rng);
    let query_forward = query.forward(&aug_q)?;
    let k = key.embed(&aug_k)?;
    Ok(ViewForward {
        record: EmbeddingRecord {
            q: query_forward.q.clone(),
            k,
            y_prime: meta.y_prime,
            partition: meta.partition,
            example_id: meta.example_id,
        },
        query_forward,
        aug_q,
    })
}
