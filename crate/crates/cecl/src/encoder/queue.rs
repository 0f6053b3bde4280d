//! Fixed-capacity FIFO of recent key embeddings.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Partition, UNIT_NORM_TOL};
use crate::vecmath::norm;
use crate::{CeclError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueEntry {
    pub key: Vec<f64>,
    pub y_prime: usize,
    pub partition: Partition,
    /// Open-set decision at push time. Selection re-decides against current
    /// prototypes, so this is a snapshot, not an authority.
    pub f_flag: bool,
    pub example_id: usize,
}

/// Chronological queue: oldest entries are evicted first, size never exceeds
/// capacity. Entries are stop-gradient constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumQueue {
    capacity: usize,
    entries: VecDeque<QueueEntry>,
}

impl MomentumQueue {
    pub fn new(capacity: usize) -> Self {
        MomentumQueue {
            capacity,
            entries: VecDeque::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Oldest-first iteration.
    pub fn iter(&self) -> impl Iterator<Item = &QueueEntry> {
        self.entries.iter()
    }

    /// Append a batch in order, then evict from the front down to capacity.
    /// Every stored embedding must be unit-norm.
    pub fn push_batch(&mut self, batch: Vec<QueueEntry>) -> Result<()> {
        for entry in batch {
            let n = norm(&entry.key);
            if (n - 1.0).abs() > UNIT_NORM_TOL {
                return Err(CeclError::Internal(format!(
                    "queue push of non-unit embedding (norm {n}) for example {}",
                    entry.example_id
                )));
            }
            self.entries.push_back(entry);
        }
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
        Ok(())
    }
}
