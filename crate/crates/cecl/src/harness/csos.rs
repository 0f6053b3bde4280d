//! Closed-set vs closed-set-plus-open-set retraining experiment.
//!
//! Trains a classifier on clean known-class examples, admits open-set
//! examples the classifier pseudo-labels with high confidence, then retrains
//! from the identical initialization on the union. Paired test-accuracy
//! curves show whether absorbing confidently-claimed open-set examples helps
//! the known classes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::{build_corpus_and_split, open_set_pool};
use crate::harness::probe::train_classifier;
use crate::vecmath::argmax;
use crate::{CeclError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsosOutcome {
    pub cs_curve: Vec<f64>,
    pub csos_curve: Vec<f64>,
    pub admitted: usize,
    pub open_pool_size: usize,
    pub confidence_threshold: f64,
}

impl CsosOutcome {
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("epoch,cs_acc,csos_acc\n");
        for (e, (a, b)) in self.cs_curve.iter().zip(&self.csos_curve).enumerate() {
            out.push_str(&format!("{e},{a},{b}\n"));
        }
        out
    }
}

pub fn cs_vs_csos_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<CsosOutcome> {
    cfg.validate()?;
    let (corpus, split) = build_corpus_and_split(cfg)?;

    let mut remap = vec![usize::MAX; corpus.class_count];
    for (dense, &orig) in split.known.iter().enumerate() {
        remap[orig] = dense;
    }
    let known_train: Vec<(Vec<f64>, usize)> = corpus
        .train
        .iter()
        .filter(|e| remap[e.label] != usize::MAX)
        .map(|e| (e.feature.clone(), remap[e.label]))
        .collect();
    let known_test: Vec<(Vec<f64>, usize)> = corpus
        .test
        .iter()
        .filter(|e| remap[e.label] != usize::MAX)
        .map(|e| (e.feature.clone(), remap[e.label]))
        .collect();
    if known_test.is_empty() {
        return Err(CeclError::Input("no known-class test examples".into()));
    }

    let accuracy = |net: &crate::encoder::Mlp| -> Result<f64> {
        let mut correct = 0usize;
        for (f, l) in &known_test {
            if argmax(&net.posterior(f)?) == *l {
                correct += 1;
            }
        }
        Ok(correct as f64 / known_test.len() as f64)
    };

    let seed = crate::rng::Rng::new(cfg.seed).fork("csos").into_seed();

    // Closed-set run.
    let mut cs_curve = Vec::with_capacity(cfg.probe_train_epochs);
    let cs_net = train_classifier(
        &known_train,
        cfg.net_config(),
        cfg.probe_train_epochs,
        cfg.batch_size,
        cfg.lr,
        cfg.sgd_momentum,
        seed,
        |_, net| {
            cs_curve.push(accuracy(net)?);
            Ok(())
        },
    )?;

    // Admit high-confidence open-set examples with their pseudo labels.
    let pool = open_set_pool(&corpus, &split);
    let mut admitted_examples = Vec::new();
    for (feature, _) in &pool {
        let p = cs_net.posterior(feature)?;
        let pred = argmax(&p);
        if p[pred] >= cfg.probe_confidence {
            admitted_examples.push((feature.clone(), pred));
        }
    }

    // Mixed run from the identical initialization (same seed, same config).
    let mut union = known_train.clone();
    union.extend(admitted_examples.iter().cloned());
    let mut csos_curve = Vec::with_capacity(cfg.probe_train_epochs);
    train_classifier(
        &union,
        cfg.net_config(),
        cfg.probe_train_epochs,
        cfg.batch_size,
        cfg.lr,
        cfg.sgd_momentum,
        seed,
        |_, net| {
            csos_curve.push(accuracy(net)?);
            Ok(())
        },
    )?;

    let outcome = CsosOutcome {
        cs_curve,
        csos_curve,
        admitted: admitted_examples.len(),
        open_pool_size: pool.len(),
        confidence_threshold: cfg.probe_confidence,
    };
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("csos_curves.csv"), outcome.curves_csv())?;
    fs::write(
        out_dir.join("csos_summary.json"),
        serde_json::to_string_pretty(&outcome)?,
    )?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.overlap_pairs.clear();
        cfg.total_classes = 5;
        cfg.known_classes = 4;
        cfg.train_per_class = 12;
        cfg.test_per_class = 8;
        cfg.input_dim = 3;
        cfg.probe_train_epochs = 4;
        cfg.hidden_dim = 10;
        cfg.proj_hidden_dim = 8;
        cfg.embed_dim = 4;
        cfg
    }

    #[test]
    fn impossible_confidence_threshold_gives_identical_curves() {
        let mut cfg = small_cfg();
        cfg.probe_confidence = 1.0; // softmax of finite logits never reaches 1
        let dir = std::env::temp_dir().join(format!("cecl-csos-test-{}", std::process::id()));
        let outcome = cs_vs_csos_experiment(&cfg, &dir).unwrap();
        assert_eq!(outcome.admitted, 0);
        assert_eq!(outcome.cs_curve, outcome.csos_curve);
        std::fs::remove_dir_all(&dir).ok();
    }
}
