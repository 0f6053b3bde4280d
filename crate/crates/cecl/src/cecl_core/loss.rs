//! The classification term, the per-example contrastive loss, their batch
//! combination, and the hand-written gradients of the total objective.
//!
//! Per-example contrastive loss for anchor embedding `q` with positives
//! `P(x)` inside pool view `A(x)`:
//!
//! ```text
//! l(q) = -(1/|P|) sum_{k+ in P} log( exp(q.k+/t) / sum_{k' in A} exp(q.k'/t) )
//! ```
//!
//! The batch objective averages per-example losses over clean anchors and,
//! separately, over incorporated (F = 1) noisy anchors; the classification
//! term does the same with cross-entropy on given labels (clean) and coarse
//! labels (incorporated). Total = classification + beta * contrastive.
//! Delimiters (F = 0) are never anchors, never positives, and contribute to
//! nothing except the denominators of other anchors' softmaxes.

use serde::{Deserialize, Serialize};

use super::select::{
    batch_f_flags, decide_pool, effective_view, select_positives, PoolDecisions, SelectionParams,
};
use super::PrototypeBank;
use crate::encoder::{EmbeddingRecord, Mlp, MlpGrads, Partition, Pool, PoolSource, ViewForward};
use crate::vecmath::{dot, log_sum_exp, softmax};
use crate::{CeclError, Result};

/// Step-2 loss knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step2Params {
    pub tau: f64,
    pub beta: f64,
    pub temperature: f64,
    pub cont_enabled: bool,
    pub osd_enabled: bool,
    pub rdos: bool,
}

impl Step2Params {
    pub fn selection(&self) -> SelectionParams {
        SelectionParams {
            tau: self.tau,
            osd_enabled: self.osd_enabled,
            rdos: self.rdos,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperature <= 0.0 {
            return Err(CeclError::Config(format!(
                "temperature {} must be > 0",
                self.temperature
            )));
        }
        if self.beta < 0.0 {
            return Err(CeclError::Config(format!("beta {} must be >= 0", self.beta)));
        }
        if self.tau < 0.0 {
            return Err(CeclError::Config(format!("tau {} must be >= 0", self.tau)));
        }
        Ok(())
    }
}

/// Raised flags for terms whose denominator was empty (the term is defined
/// as zero in that case).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossWarnings {
    pub cls_no_clean: bool,
    pub cls_no_incorporated: bool,
    pub cont_no_clean: bool,
    pub cont_no_incorporated: bool,
}

/// One batch's loss values. `l_total = l_cls + beta * l_cont` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_cls: f64,
    pub l_cont: f64,
    pub l_total: f64,
    pub beta: f64,
    pub temperature: f64,
    pub clean_count: usize,
    pub f1_count: usize,
    pub warnings: LossWarnings,
}

/// Per-example contrastive loss (log-sum-exp stabilized). An empty positive
/// set contributes zero.
pub fn contrastive_loss(q: &[f64], positives: &[&[f64]], pool: &[&[f64]], t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(CeclError::Config(format!("temperature {t} must be > 0")));
    }
    if positives.is_empty() {
        return Ok(0.0);
    }
    let scores: Vec<f64> = pool.iter().map(|e| dot(q, e) / t).collect();
    let lse = log_sum_exp(&scores);
    let mean_pos: f64 =
        positives.iter().map(|p| dot(q, p) / t).sum::<f64>() / positives.len() as f64;
    Ok(lse - mean_pos)
}

/// Classification term: mean cross-entropy with given labels over the clean
/// part plus mean cross-entropy with coarse labels over incorporated noisy
/// examples. Empty parts contribute zero.
pub fn classification_loss(
    posteriors: &[Vec<f64>],
    given: &[usize],
    y_prime: &[usize],
    partition: &[Partition],
    f_flags: &[bool],
) -> (f64, LossWarnings) {
    let mut clean_sum = 0.0;
    let mut clean_n = 0usize;
    let mut noisy_sum = 0.0;
    let mut noisy_n = 0usize;
    for i in 0..posteriors.len() {
        match partition[i] {
            Partition::Clean => {
                clean_sum -= posteriors[i][given[i]].max(1e-300).ln();
                clean_n += 1;
            }
            Partition::Noisy => {
                if f_flags[i] {
                    noisy_sum -= posteriors[i][y_prime[i]].max(1e-300).ln();
                    noisy_n += 1;
                }
            }
        }
    }
    let mut warnings = LossWarnings::default();
    let mut value = 0.0;
    if clean_n > 0 {
        value += clean_sum / clean_n as f64;
    } else {
        warnings.cls_no_clean = true;
    }
    if noisy_n > 0 {
        value += noisy_sum / noisy_n as f64;
    } else {
        warnings.cls_no_incorporated = true;
    }
    (value, warnings)
}

/// Batch contrastive objective: clean anchors and incorporated noisy anchors
/// each averaged over their own count; delimiters are never anchors but stay
/// in every anchor's view as negatives (unless RDOS removed them).
pub fn contrastive_objective(
    records: &[EmbeddingRecord],
    f_flags: &[bool],
    pool: &Pool,
    decisions: &PoolDecisions,
    t: f64,
) -> Result<(f64, LossWarnings)> {
    let mut clean_sum = 0.0;
    let mut clean_n = 0usize;
    let mut noisy_sum = 0.0;
    let mut noisy_n = 0usize;
    for (i, r) in records.iter().enumerate() {
        let is_anchor = match r.partition {
            Partition::Clean => true,
            Partition::Noisy => f_flags[i],
        };
        match r.partition {
            Partition::Clean => clean_n += 1,
            Partition::Noisy if f_flags[i] => noisy_n += 1,
            _ => {}
        }
        if !is_anchor {
            continue;
        }
        let view = effective_view(pool, i, decisions);
        let positives = select_positives(r.y_prime, pool, &view, decisions);
        let view_embeds: Vec<&[f64]> = view.iter().map(|&j| pool.entries[j].embedding.as_slice()).collect();
        let pos_embeds: Vec<&[f64]> = positives
            .iter()
            .map(|&j| pool.entries[j].embedding.as_slice())
            .collect();
        let l = contrastive_loss(&r.q, &pos_embeds, &view_embeds, t)?;
        match r.partition {
            Partition::Clean => clean_sum += l,
            Partition::Noisy => noisy_sum += l,
        }
    }
    let mut warnings = LossWarnings::default();
    let mut value = 0.0;
    if clean_n > 0 {
        value += clean_sum / clean_n as f64;
    } else {
        warnings.cont_no_clean = true;
    }
    if noisy_n > 0 {
        value += noisy_sum / noisy_n as f64;
    } else {
        warnings.cont_no_incorporated = true;
    }
    Ok((value, warnings))
}

/// Total objective.
pub fn total_loss(l_cls: f64, l_cont: f64, beta: f64) -> Result<f64> {
    if beta < 0.0 {
        return Err(CeclError::Config(format!("beta {beta} must be >= 0")));
    }
    Ok(l_cls + beta * l_cont)
}

/// Evidence trail for one anchor's selection.
#[derive(Debug, Clone)]
pub struct AnchorAudit {
    pub batch_idx: usize,
    /// Example ids of every entry in the anchor's effective view.
    pub view_example_ids: Vec<usize>,
    pub positive_example_ids: Vec<usize>,
    pub positive_count: usize,
}

/// Instrumented bookkeeping for delimiter-semantics checks.
#[derive(Debug, Clone)]
pub struct BatchAudit {
    /// Per batch member: F flag (false for clean).
    pub f_flags: Vec<bool>,
    /// Batch indices that served as anchors.
    pub anchors: Vec<usize>,
    /// Batch indices of delimiters (noisy, F = 0).
    pub delimiters: Vec<usize>,
    pub per_anchor: Vec<AnchorAudit>,
    /// Batch indices contributing a classification term.
    pub cls_members: Vec<usize>,
    /// Example ids of pool entries retained after RDOS filtering.
    pub retained_example_ids: Vec<usize>,
}

/// Everything one optimization step needs from a batch.
#[derive(Debug)]
pub struct BatchEval {
    pub breakdown: LossBreakdown,
    pub audit: BatchAudit,
    pub grads: MlpGrads,
}

/// Evaluate the total objective on one batch and accumulate its gradients
/// with respect to the query network.
///
/// Gradients flow through every occurrence of a batch query embedding: as
/// its own anchor and as a pool member in other anchors' numerators and
/// denominators. Keys and queue entries are constants.
pub fn evaluate_batch(
    query: &Mlp,
    views: &[ViewForward],
    pool: &Pool,
    bank: &PrototypeBank,
    params: &Step2Params,
) -> Result<BatchEval> {
    params.validate()?;
    let n = views.len();
    if pool.batch_size() != n {
        return Err(CeclError::Internal(format!(
            "pool built for batch of {}, evaluating batch of {n}",
            pool.batch_size()
        )));
    }
    let records: Vec<EmbeddingRecord> = views.iter().map(|v| v.record.clone()).collect();
    let sel = params.selection();
    let f_flags = batch_f_flags(&records, bank, &sel)?;
    let decisions = decide_pool(pool, &f_flags, bank, &sel)?;

    let clean_count = records.iter().filter(|r| r.partition == Partition::Clean).count();
    let f1_count = f_flags.iter().filter(|&&f| f).count();

    // Classification term and its logits gradients.
    let posteriors: Vec<Vec<f64>> = views
        .iter()
        .map(|v| softmax(&v.query_forward.logits))
        .collect();
    let given: Vec<usize> = records.iter().map(|r| r.y_prime).collect();
    // Clean examples keep their given label as coarse label, so y' serves as
    // both label arguments here.
    let (l_cls, mut warnings) =
        classification_loss(&posteriors, &given, &given, &partitions(&records), &f_flags);

    let class_count = query.cfg.class_count;
    let mut d_logits = vec![vec![0.0; class_count]; n];
    let mut cls_members = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let (in_term, weight) = match r.partition {
            Partition::Clean => (clean_count > 0, 1.0 / clean_count.max(1) as f64),
            Partition::Noisy => (f_flags[i] && f1_count > 0, 1.0 / f1_count.max(1) as f64),
        };
        if !in_term {
            continue;
        }
        cls_members.push(i);
        for j in 0..class_count {
            d_logits[i][j] = weight * posteriors[i][j];
        }
        d_logits[i][r.y_prime] -= weight;
    }

    // Contrastive term and its embedding gradients.
    let mut d_q = vec![vec![0.0; query.cfg.embed_dim]; n];
    let mut per_anchor = Vec::new();
    let mut anchors = Vec::new();
    let mut l_cont = 0.0;
    if params.cont_enabled {
        let t = params.temperature;
        let mut clean_sum = 0.0;
        let mut noisy_sum = 0.0;
        for (i, r) in records.iter().enumerate() {
            let is_anchor = r.partition == Partition::Clean || f_flags[i];
            if !is_anchor {
                continue;
            }
            anchors.push(i);
            let weight = match r.partition {
                Partition::Clean => 1.0 / clean_count as f64,
                Partition::Noisy => 1.0 / f1_count as f64,
            };
            let view = effective_view(pool, i, &decisions);
            let positives = select_positives(r.y_prime, pool, &view, &decisions);
            per_anchor.push(AnchorAudit {
                batch_idx: i,
                view_example_ids: view.iter().map(|&j| pool.entries[j].example_id).collect(),
                positive_example_ids: positives
                    .iter()
                    .map(|&j| pool.entries[j].example_id)
                    .collect(),
                positive_count: positives.len(),
            });
            if positives.is_empty() {
                continue; // contributes zero loss and zero gradient
            }
            let scores: Vec<f64> = view
                .iter()
                .map(|&j| dot(&r.q, &pool.entries[j].embedding) / t)
                .collect();
            let lse = log_sum_exp(&scores);
            let inv_p = 1.0 / positives.len() as f64;
            let mean_pos =
                positives.iter().map(|&j| dot(&r.q, &pool.entries[j].embedding) / t).sum::<f64>()
                    * inv_p;
            let l = lse - mean_pos;
            match r.partition {
                Partition::Clean => clean_sum += l,
                Partition::Noisy => noisy_sum += l,
            }

            // d l / d score_j = softmax_j - [j in P]/|P|; chain through the
            // bilinear scores into the anchor and into batch query entries.
            let coeff_scale = params.beta * weight / t;
            for (v_idx, &j) in view.iter().enumerate() {
                let mut ds = (scores[v_idx] - lse).exp();
                if positives.contains(&j) {
                    ds -= inv_p;
                }
                let c = coeff_scale * ds;
                if c == 0.0 {
                    continue;
                }
                let e = &pool.entries[j];
                for (dq, &ev) in d_q[i].iter_mut().zip(&e.embedding) {
                    *dq += c * ev;
                }
                if let PoolSource::Query { batch_idx } = e.source {
                    for (dq, &qv) in d_q[batch_idx].iter_mut().zip(&r.q) {
                        *dq += c * qv;
                    }
                }
            }
        }
        if clean_count > 0 {
            l_cont += clean_sum / clean_count as f64;
        } else {
            warnings.cont_no_clean = true;
        }
        if f1_count > 0 {
            l_cont += noisy_sum / f1_count as f64;
        } else {
            warnings.cont_no_incorporated = true;
        }
    }

    let l_total = total_loss(l_cls, l_cont, params.beta)?;

    // Backprop through each example's forward cache.
    let mut grads = MlpGrads::zeros(query);
    for (i, v) in views.iter().enumerate() {
        query.backward(&v.aug_q, &v.query_forward, &d_q[i], &d_logits[i], &mut grads);
    }

    let delimiters: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(i, r)| r.partition == Partition::Noisy && !f_flags[*i])
        .map(|(i, _)| i)
        .collect();
    let retained_example_ids: Vec<usize> = decisions
        .retained
        .iter()
        .zip(&pool.entries)
        .filter(|(&kept, _)| kept)
        .map(|(_, e)| e.example_id)
        .collect();

    Ok(BatchEval {
        breakdown: LossBreakdown {
            l_cls,
            l_cont,
            l_total,
            beta: params.beta,
            temperature: params.temperature,
            clean_count,
            f1_count,
            warnings,
        },
        audit: BatchAudit {
            f_flags,
            anchors,
            delimiters,
            per_anchor,
            cls_members,
            retained_example_ids,
        },
        grads,
    })
}

fn partitions(records: &[EmbeddingRecord]) -> Vec<Partition> {
    records.iter().map(|r| r.partition).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_positive_equal_to_anchor_gives_zero() {
        let q = vec![0.0, 1.0];
        let pool: Vec<&[f64]> = vec![&q];
        let positives: Vec<&[f64]> = vec![&q];
        let l = contrastive_loss(&q, &positives, &pool, 0.5).unwrap();
        assert!(l.abs() < 1e-12);
    }

    #[test]
    fn empty_positive_set_contributes_zero() {
        let q = vec![0.0, 1.0];
        let other = vec![1.0, 0.0];
        let pool: Vec<&[f64]> = vec![&other];
        let l = contrastive_loss(&q, &[], &pool, 0.5).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn non_positive_temperature_rejected() {
        let q = vec![0.0, 1.0];
        let pool: Vec<&[f64]> = vec![&q];
        assert!(contrastive_loss(&q, &[], &pool, 0.0).is_err());
        assert!(contrastive_loss(&q, &[], &pool, -1.0).is_err());
    }

    #[test]
    fn contrastive_matches_naive_double_loop() {
        let mut rng = crate::rng::Rng::new(13);
        for _ in 0..100 {
            let dim = 2 + rng.below(6);
            let pool_n = 2 + rng.below(10);
            let mut pool = Vec::new();
            for _ in 0..pool_n {
                let mut v = rng.normal_vec(dim);
                crate::vecmath::normalize(&mut v).unwrap();
                pool.push(v);
            }
            let mut q = rng.normal_vec(dim);
            crate::vecmath::normalize(&mut q).unwrap();
            let pos_count = 1 + rng.below(pool_n);
            let positives: Vec<&[f64]> = pool[..pos_count].iter().map(|v| v.as_slice()).collect();
            let pool_refs: Vec<&[f64]> = pool.iter().map(|v| v.as_slice()).collect();
            let t = 0.3;

            let got = contrastive_loss(&q, &positives, &pool_refs, t).unwrap();
            // Naive evaluation straight off the formula.
            let z: f64 = pool_refs.iter().map(|e| (dot(&q, e) / t).exp()).sum();
            let naive: f64 = -positives
                .iter()
                .map(|p| ((dot(&q, p) / t).exp() / z).ln())
                .sum::<f64>()
                / positives.len() as f64;
            assert!((got - naive).abs() < 1e-9, "got {got}, naive {naive}");
        }
    }

    #[test]
    fn perfect_posteriors_give_zero_cls() {
        let posteriors = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (l, _) = classification_loss(
            &posteriors,
            &[0, 1],
            &[0, 1],
            &[Partition::Clean, Partition::Noisy],
            &[false, true],
        );
        assert!(l.abs() < 1e-12);
    }

    #[test]
    fn all_noisy_f0_reduces_to_clean_average() {
        let posteriors = vec![vec![0.7, 0.3], vec![0.2, 0.8], vec![0.6, 0.4]];
        let (l, w) = classification_loss(
            &posteriors,
            &[0, 1, 0],
            &[0, 1, 1],
            &[Partition::Clean, Partition::Clean, Partition::Noisy],
            &[false, false, false],
        );
        let expected = -(0.7f64.ln() + 0.8f64.ln()) / 2.0;
        assert!((l - expected).abs() < 1e-12);
        assert!(w.cls_no_incorporated);
    }

    #[test]
    fn hand_built_three_example_batch() {
        // clean example 0 (given 0), noisy F=1 example 1 (y' 1), noisy F=0 example 2.
        let posteriors = vec![vec![0.9, 0.1], vec![0.25, 0.75], vec![0.5, 0.5]];
        let (l, _) = classification_loss(
            &posteriors,
            &[0, 0, 1],
            &[0, 1, 0],
            &[Partition::Clean, Partition::Noisy, Partition::Noisy],
            &[false, true, false],
        );
        let expected = -(0.9f64.ln()) / 1.0 + -(0.75f64.ln()) / 1.0;
        assert!((l - expected).abs() < 1e-12);
    }

    #[test]
    fn both_terms_empty_is_zero_with_warnings() {
        let posteriors = vec![vec![0.5, 0.5]];
        let (l, w) = classification_loss(
            &posteriors,
            &[0],
            &[0],
            &[Partition::Noisy],
            &[false],
        );
        assert_eq!(l, 0.0);
        assert!(w.cls_no_clean && w.cls_no_incorporated);
    }

    #[test]
    fn total_loss_is_exact_affine() {
        assert_eq!(total_loss(1.0, 2.0, 0.5).unwrap(), 2.0);
        assert_eq!(total_loss(1.5, 7.0, 0.0).unwrap(), 1.5);
        assert!(total_loss(1.0, 1.0, -0.1).is_err());
    }
}
