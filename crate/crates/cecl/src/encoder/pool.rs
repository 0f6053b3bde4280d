//! Contrastive embedding pool: batch queries, batch keys, and the queue.

use super::{EmbeddingRecord, MomentumQueue, Partition};

/// Where a pool entry came from. Gradients flow only into `Query` entries;
/// keys and queue entries are constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolSource {
    Query { batch_idx: usize },
    Key { batch_idx: usize },
    Queue,
}

#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub embedding: Vec<f64>,
    pub y_prime: usize,
    pub partition: Partition,
    pub example_id: usize,
    pub source: PoolSource,
}

/// The pool `A`: all batch query embeddings, all batch key embeddings, then
/// the queue in chronological order.
#[derive(Debug, Clone)]
pub struct Pool {
    pub entries: Vec<PoolEntry>,
    batch_size: usize,
}

pub fn build_pool(records: &[EmbeddingRecord], queue: &MomentumQueue) -> Pool {
    let mut entries = Vec::with_capacity(2 * records.len() + queue.len());
    for (i, r) in records.iter().enumerate() {
        entries.push(PoolEntry {
            embedding: r.q.clone(),
            y_prime: r.y_prime,
            partition: r.partition,
            example_id: r.example_id,
            source: PoolSource::Query { batch_idx: i },
        });
    }
    for (i, r) in records.iter().enumerate() {
        entries.push(PoolEntry {
            embedding: r.k.clone(),
            y_prime: r.y_prime,
            partition: r.partition,
            example_id: r.example_id,
            source: PoolSource::Key { batch_idx: i },
        });
    }
    for e in queue.iter() {
        entries.push(PoolEntry {
            embedding: e.key.clone(),
            y_prime: e.y_prime,
            partition: e.partition,
            example_id: e.example_id,
            source: PoolSource::Queue,
        });
    }
    Pool {
        entries,
        batch_size: records.len(),
    }
}

impl Pool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// Entry indices visible to an anchor: everything except the anchor's own
    /// query embedding (its own key stays in).
    pub fn anchor_view(&self, anchor_batch_idx: usize) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| self.entries[i].source != PoolSource::Query { batch_idx: anchor_batch_idx })
            .collect()
    }
}
