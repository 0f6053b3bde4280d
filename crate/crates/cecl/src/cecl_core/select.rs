//! Open-set decisions and positive-set selection over the embedding pool.

use serde::{Deserialize, Serialize};

use super::prototype::{cosine_distance, PrototypeBank};
use crate::encoder::{EmbeddingRecord, Partition, Pool, PoolSource};
use crate::Result;

/// Selection knobs: the open-set threshold plus the ablation switches that
/// act at selection time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    /// Cosine-distance threshold for incorporating a noisy example.
    pub tau: f64,
    /// Off: every noisy example counts as incorporated (no delimiters).
    pub osd_enabled: bool,
    /// On: distinguishable open-set entries are dropped from pools entirely
    /// instead of serving as negatives.
    pub rdos: bool,
}

/// The open-set decision for a noisy-partition embedding: incorporated
/// (`true`, F = 1) iff its cosine distance to its coarse-label prototype is
/// strictly below tau. Callers apply this to noisy examples only; clean
/// examples carry F = 0 by the indicator's definition.
pub fn open_set_decision(
    q: &[f64],
    bank: &PrototypeBank,
    y_prime: usize,
    tau: f64,
) -> Result<bool> {
    Ok(cosine_distance(q, bank.prototype(y_prime))? < tau)
}

/// Per-example F flags for a batch, decided on the query embedding against
/// current prototypes. Clean examples get `false`; with OSD disabled every
/// noisy example gets `true`.
pub fn batch_f_flags(
    records: &[EmbeddingRecord],
    bank: &PrototypeBank,
    params: &SelectionParams,
) -> Result<Vec<bool>> {
    records
        .iter()
        .map(|r| match r.partition {
            Partition::Clean => Ok(false),
            Partition::Noisy => {
                if !params.osd_enabled {
                    Ok(true)
                } else {
                    open_set_decision(&r.q, bank, r.y_prime, params.tau)
                }
            }
        })
        .collect()
}

/// Selection verdict for every pool entry.
///
/// Batch entries inherit their example's F flag, so a delimiter example's
/// query and key views are excluded from positive sets together. Queue
/// entries predate the current prototypes and are re-decided here from their
/// stored embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolDecisions {
    /// Positive-eligible for matching-label anchors (clean entries always;
    /// noisy entries only when incorporated).
    pub incorporated: Vec<bool>,
    /// Present in anchors' views. Only RDOS clears this, and only for noisy
    /// entries that failed the open-set decision.
    pub retained: Vec<bool>,
}

pub fn decide_pool(
    pool: &Pool,
    batch_f: &[bool],
    bank: &PrototypeBank,
    params: &SelectionParams,
) -> Result<PoolDecisions> {
    let mut incorporated = Vec::with_capacity(pool.len());
    for e in &pool.entries {
        let inc = match e.partition {
            Partition::Clean => true,
            Partition::Noisy => match e.source {
                PoolSource::Query { batch_idx } | PoolSource::Key { batch_idx } => {
                    batch_f[batch_idx]
                }
                PoolSource::Queue => {
                    if !params.osd_enabled {
                        true
                    } else {
                        open_set_decision(&e.embedding, bank, e.y_prime, params.tau)?
                    }
                }
            },
        };
        incorporated.push(inc);
    }
    let retained = incorporated
        .iter()
        .zip(&pool.entries)
        .map(|(&inc, e)| !params.rdos || e.partition == Partition::Clean || inc)
        .collect();
    Ok(PoolDecisions {
        incorporated,
        retained,
    })
}

/// Entry indices an anchor contrasts against: its anchor view minus entries
/// RDOS removed.
pub fn effective_view(pool: &Pool, anchor_batch_idx: usize, decisions: &PoolDecisions) -> Vec<usize> {
    pool.anchor_view(anchor_batch_idx)
        .into_iter()
        .filter(|&i| decisions.retained[i])
        .collect()
}

/// P(x): entries of the anchor's view sharing its coarse label, restricted to
/// incorporated entries (all clean entries, plus noisy entries within tau of
/// their class prototype).
pub fn select_positives(
    anchor_y_prime: usize,
    pool: &Pool,
    view: &[usize],
    decisions: &PoolDecisions,
) -> Vec<usize> {
    view.iter()
        .copied()
        .filter(|&i| pool.entries[i].y_prime == anchor_y_prime && decisions.incorporated[i])
        .collect()
}
