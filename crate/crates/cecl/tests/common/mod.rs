//! Shared test fixtures and independent brute-force oracles.
//!
//! The oracles re-derive selection and loss values straight from their
//! defining formulas with naive double loops, no log-sum-exp and no shared
//! code with the production path they check.

#![allow(dead_code)]

use cecl::cecl_core::{cosine_distance, init_prototypes, PrototypeBank, SelectionParams};
use cecl::encoder::{EmbeddingRecord, MomentumQueue, Partition, Pool, PoolSource, QueueEntry};
use cecl::rng::Rng;
use cecl::vecmath::{dot, normalize};

pub fn unit_vec(rng: &mut Rng, dim: usize) -> Vec<f64> {
    loop {
        let mut v = rng.normal_vec(dim);
        if normalize(&mut v).is_ok() {
            return v;
        }
    }
}

pub fn random_bank(rng: &mut Rng, classes: usize, dim: usize) -> PrototypeBank {
    let groups: Vec<Vec<Vec<f64>>> = (0..classes).map(|_| vec![unit_vec(rng, dim)]).collect();
    init_prototypes(&groups, 0.99).unwrap()
}

pub fn random_records(
    rng: &mut Rng,
    batch: usize,
    classes: usize,
    dim: usize,
) -> Vec<EmbeddingRecord> {
    (0..batch)
        .map(|i| EmbeddingRecord {
            q: unit_vec(rng, dim),
            k: unit_vec(rng, dim),
            y_prime: rng.below(classes),
            partition: if rng.below(3) == 0 {
                Partition::Clean
            } else {
                Partition::Noisy
            },
            example_id: i,
        })
        .collect()
}

pub fn random_queue(
    rng: &mut Rng,
    entries: usize,
    classes: usize,
    dim: usize,
    id_base: usize,
) -> MomentumQueue {
    let mut queue = MomentumQueue::new(entries.max(1));
    let batch: Vec<QueueEntry> = (0..entries)
        .map(|j| QueueEntry {
            key: unit_vec(rng, dim),
            y_prime: rng.below(classes),
            partition: if rng.below(2) == 0 {
                Partition::Clean
            } else {
                Partition::Noisy
            },
            f_flag: false,
            example_id: id_base + j,
        })
        .collect();
    queue.push_batch(batch).unwrap();
    queue
}

/// Naive per-example contrastive loss straight off the formula, no
/// stabilization.
pub fn naive_contrastive(q: &[f64], positives: &[Vec<f64>], pool: &[Vec<f64>], t: f64) -> f64 {
    if positives.is_empty() {
        return 0.0;
    }
    let z: f64 = pool.iter().map(|e| (dot(q, e) / t).exp()).sum();
    let mut total = 0.0;
    for p in positives {
        total += ((dot(q, p) / t).exp() / z).ln();
    }
    -total / positives.len() as f64
}

/// Independent re-derivation of the batch objectives: per-entry eligibility
/// from the distance rule, anchor sets, per-anchor pools and positives, and
/// the two-term averages.
pub struct NaiveBatchEval {
    pub l_cls: f64,
    pub l_cont: f64,
    pub l_total: f64,
}

pub fn naive_batch_eval(
    records: &[EmbeddingRecord],
    queue: &MomentumQueue,
    bank: &PrototypeBank,
    posteriors: &[Vec<f64>],
    sel: &SelectionParams,
    t: f64,
    beta: f64,
) -> NaiveBatchEval {
    let _n = records.len();

    // Example-level F flags from the query embeddings.
    let f_flags: Vec<bool> = records
        .iter()
        .map(|r| match r.partition {
            Partition::Clean => false,
            Partition::Noisy => {
                !sel.osd_enabled
                    || cosine_distance(&r.q, bank.prototype(r.y_prime)).unwrap() < sel.tau
            }
        })
        .collect();

    // Flat entry list mirroring pool construction order: queries, keys, queue.
    struct Entry {
        embedding: Vec<f64>,
        y: usize,
        partition: Partition,
        batch_idx: Option<usize>,
        is_query_of: Option<usize>,
    }
    let mut entries = Vec::new();
    for (i, r) in records.iter().enumerate() {
        entries.push(Entry {
            embedding: r.q.clone(),
            y: r.y_prime,
            partition: r.partition,
            batch_idx: Some(i),
            is_query_of: Some(i),
        });
    }
    for (i, r) in records.iter().enumerate() {
        entries.push(Entry {
            embedding: r.k.clone(),
            y: r.y_prime,
            partition: r.partition,
            batch_idx: Some(i),
            is_query_of: None,
        });
    }
    for e in queue.iter() {
        entries.push(Entry {
            embedding: e.key.clone(),
            y: e.y_prime,
            partition: e.partition,
            batch_idx: None,
            is_query_of: None,
        });
    }

    let eligible = |e: &Entry| -> bool {
        match e.partition {
            Partition::Clean => true,
            Partition::Noisy => match e.batch_idx {
                Some(b) => f_flags[b],
                None => {
                    !sel.osd_enabled
                        || cosine_distance(&e.embedding, bank.prototype(e.y)).unwrap() < sel.tau
                }
            },
        }
    };

    let clean_count = records.iter().filter(|r| r.partition == Partition::Clean).count();
    let f1_count = f_flags.iter().filter(|&&f| f).count();

    // Classification: Eq. 5 with batch denominators.
    let mut cls_clean = 0.0;
    let mut cls_noisy = 0.0;
    for (i, r) in records.iter().enumerate() {
        match r.partition {
            Partition::Clean => cls_clean -= posteriors[i][r.y_prime].max(1e-300).ln(),
            Partition::Noisy => {
                if f_flags[i] {
                    cls_noisy -= posteriors[i][r.y_prime].max(1e-300).ln();
                }
            }
        }
    }
    let mut l_cls = 0.0;
    if clean_count > 0 {
        l_cls += cls_clean / clean_count as f64;
    }
    if f1_count > 0 {
        l_cls += cls_noisy / f1_count as f64;
    }

    // Contrastive: Eq. 6 with Eq. 1 per anchor.
    let mut cont_clean = 0.0;
    let mut cont_noisy = 0.0;
    for (i, r) in records.iter().enumerate() {
        let anchors = r.partition == Partition::Clean || f_flags[i];
        if !anchors {
            continue;
        }
        let mut pool_embeds = Vec::new();
        let mut pos_embeds = Vec::new();
        for e in &entries {
            if e.is_query_of == Some(i) {
                continue; // A(x) excludes the anchor's own query view
            }
            if sel.rdos && e.partition == Partition::Noisy && !eligible(e) {
                continue;
            }
            pool_embeds.push(e.embedding.clone());
            if e.y == r.y_prime && eligible(e) {
                pos_embeds.push(e.embedding.clone());
            }
        }
        let l = naive_contrastive(&r.q, &pos_embeds, &pool_embeds, t);
        match r.partition {
            Partition::Clean => cont_clean += l,
            Partition::Noisy => cont_noisy += l,
        }
    }
    let mut l_cont = 0.0;
    if clean_count > 0 {
        l_cont += cont_clean / clean_count as f64;
    }
    if f1_count > 0 {
        l_cont += cont_noisy / f1_count as f64;
    }

    NaiveBatchEval {
        l_cls,
        l_cont,
        l_total: l_cls + beta * l_cont,
    }
}

/// Entry ids an example contributes to a pool, for bookkeeping assertions.
pub fn pool_ids_of_example(pool: &Pool, example_id: usize) -> Vec<usize> {
    pool.entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.example_id == example_id)
        .map(|(i, _)| i)
        .collect()
}

pub fn is_query_source(pool: &Pool, entry_idx: usize) -> bool {
    matches!(pool.entries[entry_idx].source, PoolSource::Query { .. })
}
