//! Step-2 training loop.
//!
//! Each step is a transaction in a fixed order: forward views, build the
//! pool against a queue snapshot, open-set decisions, losses and gradients,
//! optimizer step on the query network, momentum update of the key network,
//! queue push, then prototype moving-average updates for the batch's anchors.

use serde::{Deserialize, Serialize};

use super::loss::{evaluate_batch, LossBreakdown, Step2Params};
use super::prototype::{init_prototypes, PrototypeBank};
use crate::datagen::{NoisyDataset, TestExample};
use crate::encoder::{
    build_pool, cosine_lr, forward_views, AugmentationSpec, Mlp, MlpConfig, MomentumQueue,
    Partition, QueueEntry, RecordMeta, SgdMomentum, ViewForward,
};
use crate::rng::Rng;
use crate::step1::CoarseLabeledDataset;
use crate::vecmath::argmax;
use crate::{CeclError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step2Config {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub sgd_momentum: f64,
    pub tau: f64,
    /// Prototype moving-average factor.
    pub gamma: f64,
    pub beta: f64,
    pub temperature: f64,
    /// Key-network EMA factor.
    pub key_momentum: f64,
    pub queue_capacity: usize,
    pub aug_jitter: f64,
    pub cont_enabled: bool,
    pub osd_enabled: bool,
    pub rdos: bool,
}

impl Step2Config {
    pub fn params(&self) -> Step2Params {
        Step2Params {
            tau: self.tau,
            beta: self.beta,
            temperature: self.temperature,
            cont_enabled: self.cont_enabled,
            osd_enabled: self.osd_enabled,
            rdos: self.rdos,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(CeclError::Config("step-2 epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(CeclError::Config("batch_size must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(CeclError::Config(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if !(0.0..1.0).contains(&self.key_momentum) {
            return Err(CeclError::Config(format!(
                "key_momentum {} outside [0, 1)",
                self.key_momentum
            )));
        }
        self.params().validate()
    }
}

/// Full step-2 training state; serializable for checkpointing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    pub step2: Step2Config,
    pub query: Mlp,
    pub key: Mlp,
    pub queue: MomentumQueue,
    pub bank: PrototypeBank,
    pub optimizer: SgdMomentum,
    pub epoch: usize,
    pub seed: u64,
}

/// Per-epoch aggregates; everything the metrics stream reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub l_cls: f64,
    pub l_cont: f64,
    pub l_total: f64,
    /// Dataset-level clean-partition size.
    pub clean_count: usize,
    /// Incorporated (F = 1) decisions summed over the epoch's batches.
    pub f1_total: usize,
    pub delimiter_total: usize,
    /// Sum over classes of how far each prototype moved this epoch.
    pub prototype_drift: f64,
    pub lr: f64,
    pub batches: usize,
    /// Batches where some loss term had an empty denominator.
    pub warning_batches: usize,
}

/// Build the initial state: warm-started (or fresh) query network, key
/// network as its copy, prototypes from the clean partition's unaugmented
/// query embeddings, empty queue.
pub fn init_train_state(
    dataset: &NoisyDataset,
    coarse: &CoarseLabeledDataset,
    warm_start: Option<&Mlp>,
    net_cfg: MlpConfig,
    cfg: Step2Config,
    seed: u64,
) -> Result<TrainState> {
    cfg.validate()?;
    if coarse.partition.len() != dataset.examples.len() {
        return Err(CeclError::Input(format!(
            "coarse labels cover {} examples, dataset has {}",
            coarse.partition.len(),
            dataset.examples.len()
        )));
    }
    let query = match warm_start {
        Some(net) => net.clone(),
        None => {
            let mut net = Mlp::new(net_cfg, Rng::new(seed).fork("step2-init").into_seed());
            net.standardize_from(dataset.examples.iter().map(|e| e.feature.as_slice()))?;
            net
        }
    };
    let key = query.clone();

    let c = dataset.known_class_count;
    let mut groups: Vec<Vec<Vec<f64>>> = vec![Vec::new(); c];
    for (idx, ex) in dataset.examples.iter().enumerate() {
        if coarse.partition[idx] == Partition::Clean {
            groups[coarse.y_prime[idx]].push(query.embed(&ex.feature)?);
        }
    }
    let bank = init_prototypes(&groups, cfg.gamma)?;
    let optimizer = SgdMomentum::new(&query, cfg.sgd_momentum)?;

    Ok(TrainState {
        step2: cfg,
        queue: MomentumQueue::new(cfg.queue_capacity),
        bank,
        optimizer,
        query,
        key,
        epoch: 0,
        seed,
    })
}

/// One pass over the training set. Returns the epoch aggregates and one
/// [`LossBreakdown`] per batch.
pub fn train_epoch(
    state: &mut TrainState,
    dataset: &NoisyDataset,
    coarse: &CoarseLabeledDataset,
) -> Result<(EpochMetrics, Vec<LossBreakdown>)> {
    let cfg = state.step2;
    let params = cfg.params();
    let n = dataset.examples.len();
    let root = Rng::new(state.seed);
    let mut order: Vec<usize> = (0..n).collect();
    root.fork("step2-shuffle")
        .fork_u64(state.epoch as u64)
        .shuffle(&mut order);
    let mut aug_rng = root.fork("step2-aug").fork_u64(state.epoch as u64);
    let aug = AugmentationSpec {
        jitter_std: cfg.aug_jitter,
    };
    let lr = cosine_lr(cfg.lr, state.epoch, cfg.epochs);

    let bank_start = state.bank.clone();
    let mut breakdowns = Vec::new();
    let mut f1_total = 0usize;
    let mut delimiter_total = 0usize;
    let mut warning_batches = 0usize;

    for batch_ids in order.chunks(cfg.batch_size) {
        let mut views: Vec<ViewForward> = Vec::with_capacity(batch_ids.len());
        for &idx in batch_ids {
            let ex = &dataset.examples[idx];
            views.push(forward_views(
                &state.query,
                &state.key,
                &ex.feature,
                &aug,
                &mut aug_rng,
                RecordMeta {
                    y_prime: coarse.y_prime[idx],
                    partition: coarse.partition[idx],
                    example_id: ex.id,
                },
            )?);
        }
        let records: Vec<_> = views.iter().map(|v| v.record.clone()).collect();
        let pool = build_pool(&records, &state.queue);
        let eval = evaluate_batch(&state.query, &views, &pool, &state.bank, &params)?;

        state.optimizer.step(&mut state.query, &eval.grads, lr)?;
        state.key.momentum_update(&state.query, cfg.key_momentum)?;

        let entries: Vec<QueueEntry> = records
            .iter()
            .zip(&eval.audit.f_flags)
            .map(|(r, &f)| QueueEntry {
                key: r.k.clone(),
                y_prime: r.y_prime,
                partition: r.partition,
                f_flag: f,
                example_id: r.example_id,
            })
            .collect();
        state.queue.push_batch(entries)?;

        // Prototype updates for this batch's anchors, in arrival order.
        for &i in &eval.audit.anchors {
            state.bank.update(&records[i].q, records[i].y_prime)?;
        }

        f1_total += eval.breakdown.f1_count;
        delimiter_total += eval.audit.delimiters.len();
        let w = eval.breakdown.warnings;
        if w.cls_no_clean || w.cls_no_incorporated || w.cont_no_clean || w.cont_no_incorporated {
            warning_batches += 1;
        }
        breakdowns.push(eval.breakdown);
    }

    let batches = breakdowns.len();
    let inv = 1.0 / batches.max(1) as f64;
    let prototype_drift: f64 = (0..state.bank.class_count())
        .map(|i| {
            crate::vecmath::squared_distance(bank_start.prototype(i), state.bank.prototype(i))
                .sqrt()
        })
        .sum();

    let metrics = EpochMetrics {
        epoch: state.epoch,
        l_cls: breakdowns.iter().map(|b| b.l_cls).sum::<f64>() * inv,
        l_cont: breakdowns.iter().map(|b| b.l_cont).sum::<f64>() * inv,
        l_total: breakdowns.iter().map(|b| b.l_total).sum::<f64>() * inv,
        clean_count: coarse.clean_count(),
        f1_total,
        delimiter_total,
        prototype_drift,
        lr,
        batches,
        warning_batches,
    };
    state.epoch += 1;
    Ok((metrics, breakdowns))
}

/// Fraction of test examples whose classifier argmax matches the label.
pub fn test_accuracy(net: &Mlp, test: &[TestExample]) -> Result<f64> {
    if test.is_empty() {
        return Err(CeclError::Input("empty test set".into()));
    }
    let mut correct = 0usize;
    for ex in test {
        if argmax(&net.posterior(&ex.feature)?) == ex.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}
