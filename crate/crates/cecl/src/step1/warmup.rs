//! Dual-network co-teaching warmup.

use serde::{Deserialize, Serialize};

use super::{AgreementHistory, EpochPrediction};
use crate::datagen::NoisyDataset;
use crate::encoder::{Mlp, MlpConfig, MlpGrads, SgdMomentum};
use crate::rng::Rng;
use crate::vecmath::{argmax, softmax};
use crate::{CeclError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step1Config {
    pub warmup_epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub sgd_momentum: f64,
    /// Noise-rate guess driving the small-loss keep fraction.
    pub estimated_noise_rate: f64,
    /// Fraction of warmup over which the keep fraction ramps from 1 down to
    /// `1 - estimated_noise_rate`.
    pub ramp_fraction: f64,
    /// Posterior needed before a prediction counts as confident.
    pub confidence_threshold: f64,
    /// Fraction of warmup epochs ignored by the correction record.
    pub burnin_fraction: f64,
}

impl Default for Step1Config {
    fn default() -> Self {
        Step1Config {
            warmup_epochs: 20,
            batch_size: 64,
            lr: 0.05,
            sgd_momentum: 0.9,
            estimated_noise_rate: 0.2,
            ramp_fraction: 0.5,
            confidence_threshold: 0.5,
            burnin_fraction: 0.2,
        }
    }
}

impl Step1Config {
    pub fn validate(&self) -> Result<()> {
        if self.warmup_epochs == 0 {
            return Err(CeclError::Config("warmup_epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(CeclError::Config("batch_size must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.estimated_noise_rate) {
            return Err(CeclError::Config(format!(
                "estimated_noise_rate {} outside [0, 1]",
                self.estimated_noise_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.ramp_fraction) || !(0.0..=1.0).contains(&self.burnin_fraction) {
            return Err(CeclError::Config(
                "ramp_fraction and burnin_fraction must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Small-loss keep fraction at a given epoch.
    pub fn keep_fraction(&self, epoch: usize) -> f64 {
        let ramp_epochs = ((self.ramp_fraction * self.warmup_epochs as f64).round() as usize).max(1);
        let progress = ((epoch + 1) as f64 / ramp_epochs as f64).min(1.0);
        1.0 - self.estimated_noise_rate * progress
    }
}

#[derive(Debug, Clone)]
pub struct WarmupOutcome {
    pub net_a: Mlp,
    pub net_b: Mlp,
    pub history: AgreementHistory,
}

fn per_example_ce(net: &Mlp, feature: &[f64], label: usize) -> Result<f64> {
    let p = net.posterior(feature)?;
    Ok(-p[label].max(1e-300).ln())
}

/// One SGD step on the cross-entropy of the chosen examples.
fn train_on(
    net: &mut Mlp,
    opt: &mut SgdMomentum,
    dataset: &NoisyDataset,
    chosen: &[usize],
    lr: f64,
) -> Result<()> {
    if chosen.is_empty() {
        return Ok(());
    }
    let mut grads = MlpGrads::zeros(net);
    let scale = 1.0 / chosen.len() as f64;
    let embed_dim = net.cfg.embed_dim;
    for &idx in chosen {
        let ex = &dataset.examples[idx];
        let fwd = net.forward(&ex.feature)?;
        let mut d_logits = softmax(&fwd.logits);
        d_logits[ex.given] -= 1.0;
        for g in d_logits.iter_mut() {
            *g *= scale;
        }
        net.backward(&ex.feature, &fwd, &vec![0.0; embed_dim], &d_logits, &mut grads);
    }
    opt.step(net, &grads, lr)
}

/// Mean posterior of the two networks; the "model" whose predictions the
/// correction record tracks.
pub fn ensemble_posterior(net_a: &Mlp, net_b: &Mlp, feature: &[f64]) -> Result<Vec<f64>> {
    let pa = net_a.posterior(feature)?;
    let pb = net_b.posterior(feature)?;
    Ok(pa.iter().zip(&pb).map(|(a, b)| 0.5 * (a + b)).collect())
}

/// Co-teaching warmup over the noisy dataset. Returns both trained networks
/// and the per-epoch prediction history the correction record is built from.
pub fn warmup_train(
    dataset: &NoisyDataset,
    cfg: &Step1Config,
    net_cfg: MlpConfig,
    seed: u64,
) -> Result<WarmupOutcome> {
    cfg.validate()?;
    if dataset.examples.is_empty() {
        return Err(CeclError::Input("empty training set".into()));
    }
    let root = Rng::new(seed);
    let mut net_a = Mlp::new(net_cfg, root.fork("warmup-net-a").into_seed());
    let mut net_b = Mlp::new(net_cfg, root.fork("warmup-net-b").into_seed());
    net_a.standardize_from(dataset.examples.iter().map(|e| e.feature.as_slice()))?;
    net_b.standardize_from(dataset.examples.iter().map(|e| e.feature.as_slice()))?;
    let mut opt_a = SgdMomentum::new(&net_a, cfg.sgd_momentum)?;
    let mut opt_b = SgdMomentum::new(&net_b, cfg.sgd_momentum)?;

    let n = dataset.examples.len();
    let mut history = AgreementHistory {
        given: dataset.examples.iter().map(|e| e.given).collect(),
        epochs: Vec::with_capacity(cfg.warmup_epochs),
    };

    for epoch in 0..cfg.warmup_epochs {
        let mut order: Vec<usize> = (0..n).collect();
        root.fork("warmup-shuffle").fork_u64(epoch as u64).shuffle(&mut order);
        let keep = cfg.keep_fraction(epoch);

        for batch in order.chunks(cfg.batch_size) {
            let mut losses_a = Vec::with_capacity(batch.len());
            let mut losses_b = Vec::with_capacity(batch.len());
            for &idx in batch {
                let ex = &dataset.examples[idx];
                losses_a.push((per_example_ce(&net_a, &ex.feature, ex.given)?, idx));
                losses_b.push((per_example_ce(&net_b, &ex.feature, ex.given)?, idx));
            }
            // Small-loss selection runs per given-label group: a class whose
            // examples all rank badly overall would otherwise drop out of
            // training entirely and never recover a clean core.
            let small_loss = |mut losses: Vec<(f64, usize)>| -> Vec<usize> {
                losses.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.known_class_count];
                for (_, idx) in losses {
                    by_class[dataset.examples[idx].given].push(idx);
                }
                let mut picked = Vec::new();
                for group in by_class {
                    if group.is_empty() {
                        continue;
                    }
                    let keep_count =
                        ((keep * group.len() as f64).round() as usize).clamp(1, group.len());
                    picked.extend_from_slice(&group[..keep_count]);
                }
                picked.sort_unstable();
                picked
            };
            let pick_a = small_loss(losses_a);
            let pick_b = small_loss(losses_b);
            // Peer exchange: each net trains on the other's selection.
            train_on(&mut net_a, &mut opt_a, dataset, &pick_b, cfg.lr)?;
            train_on(&mut net_b, &mut opt_b, dataset, &pick_a, cfg.lr)?;
        }

        let mut epoch_preds = Vec::with_capacity(n);
        for ex in &dataset.examples {
            let p = ensemble_posterior(&net_a, &net_b, &ex.feature)?;
            let pred = argmax(&p);
            epoch_preds.push(EpochPrediction {
                pred,
                confidence: p[pred],
            });
        }
        history.epochs.push(epoch_preds);
    }

    Ok(WarmupOutcome {
        net_a,
        net_b,
        history,
    })
}
