//! Flat key-value experiment configuration.
//!
//! The config file format is line-oriented: `key = value`, `#` starts a
//! comment line, blank lines are ignored. Every key is typed and known ahead
//! of time; unknown keys and duplicate keys are errors. A run directory
//! always receives the canonical re-emission of the exact config it ran.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::datagen::{
    cyclic_pair_map, BlobLayout, BlobSpec, ClassSplit, NoiseKind, NoiseSpec, OpenSetLabeling,
    OverlapPair,
};
use crate::encoder::MlpConfig;
use crate::rng::Rng;
use crate::step1::Step1Config;
use crate::cecl_core::Step2Config;
use crate::{CeclError, Result};

/// Overlap directive expressed against the seeded class split: the
/// `unknown_rank`-th unknown class is centered `distance` away from the
/// `known_rank`-th known class, with its within-class deviation scaled by
/// `spread` (1.0 keeps the corpus default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapRule {
    pub unknown_rank: usize,
    pub known_rank: usize,
    pub distance: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpenSetLabelingRule {
    /// Symmetric noise labels open-set examples uniformly; asymmetric noise
    /// assigns each unknown class a fixed known label cyclically.
    Default,
    Uniform,
    Cyclic,
}

/// Every knob of a full experiment. Defaults describe the desk-scale blob
/// benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    // corpus
    pub corpus: String,
    pub total_classes: usize,
    pub known_classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub input_dim: usize,
    pub layout: BlobLayout,
    pub center_spread: f64,
    pub within_std: f64,
    pub overlap_pairs: Vec<OverlapRule>,
    // noise
    pub noise_kind: NoiseKind,
    pub noise_rate: f64,
    pub open_set_fraction: f64,
    pub open_set_labeling: OpenSetLabelingRule,
    // model
    pub hidden_dim: usize,
    pub proj_hidden_dim: usize,
    pub embed_dim: usize,
    // step 1
    pub warmup_epochs: usize,
    pub warmup_batch_size: usize,
    pub warmup_lr: f64,
    /// `None` ("auto") means use `noise_rate`.
    pub estimated_noise_rate: Option<f64>,
    pub confidence_threshold: f64,
    pub burnin_fraction: f64,
    pub ramp_fraction: f64,
    // step 2
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub sgd_momentum: f64,
    pub tau: f64,
    pub gamma: f64,
    pub beta: f64,
    pub temperature: f64,
    pub key_momentum: f64,
    pub queue_capacity: usize,
    pub aug_jitter: f64,
    /// Initialize the step-2 networks from the step-1 classifier instead of
    /// a fresh seed.
    pub warm_start: bool,
    // ablation switches
    pub cont_enabled: bool,
    pub osd_enabled: bool,
    pub rdos: bool,
    // probe / retraining experiments
    pub probe_confidence: f64,
    pub probe_train_epochs: usize,
    // tau sweep
    pub sweep_taus: Vec<f64>,
    // run
    pub seed: u64,
    pub deterministic: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: "blobs".into(),
            total_classes: 10,
            known_classes: 8,
            train_per_class: 60,
            test_per_class: 1000,
            input_dim: 6,
            layout: BlobLayout::Ring,
            center_spread: 4.0,
            within_std: 1.0,
            overlap_pairs: vec![
                // One unknown class sits exactly on a known class
                // (indistinct, class-expansion material) ...
                OverlapRule {
                    unknown_rank: 0,
                    known_rank: 0,
                    distance: 0.0,
                    spread: 1.0,
                },
                // ... the other is a diffuse cloud whose far tail is
                // genuinely off-manifold (delimiter material).
                OverlapRule {
                    unknown_rank: 1,
                    known_rank: 1,
                    distance: 4.0,
                    spread: 4.0,
                },
            ],
            noise_kind: NoiseKind::Symmetric,
            noise_rate: 0.2,
            open_set_fraction: 0.2,
            open_set_labeling: OpenSetLabelingRule::Default,
            hidden_dim: 24,
            proj_hidden_dim: 32,
            embed_dim: 16,
            warmup_epochs: 9,
            warmup_batch_size: 64,
            warmup_lr: 0.05,
            estimated_noise_rate: None,
            confidence_threshold: 0.5,
            burnin_fraction: 0.2,
            ramp_fraction: 0.5,
            epochs: 60,
            batch_size: 64,
            lr: 0.05,
            sgd_momentum: 0.9,
            tau: 0.12,
            gamma: 0.99,
            beta: 0.5,
            temperature: 0.25,
            key_momentum: 0.99,
            queue_capacity: 480,
            aug_jitter: 0.7,
            warm_start: false,
            cont_enabled: true,
            osd_enabled: true,
            rdos: false,
            probe_confidence: 0.9,
            probe_train_epochs: 30,
            sweep_taus: vec![0.06, 0.09, 0.12, 0.15, 0.18],
            seed: 0,
            deterministic: true,
        }
    }
}

fn parse_typed<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse::<T>().map_err(|_| {
        CeclError::Config(format!(
            "key '{key}': cannot parse {value:?} as {}",
            std::any::type_name::<T>()
        ))
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(CeclError::Config(format!(
            "key '{key}': expected a boolean, got {value:?}"
        ))),
    }
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() {
        return Ok(vec![]);
    }
    value
        .split(',')
        .map(|s| parse_typed::<f64>(key, s.trim()))
        .collect()
}

fn parse_overlaps(key: &str, value: &str) -> Result<Vec<OverlapRule>> {
    if value.trim().is_empty() {
        return Ok(vec![]);
    }
    value
        .split(';')
        .map(|entry| {
            let parts: Vec<&str> = entry.trim().split(':').collect();
            if parts.len() != 3 && parts.len() != 4 {
                return Err(CeclError::Config(format!(
                    "key '{key}': overlap entry {entry:?} is not unknown:known:distance[:spread]"
                )));
            }
            Ok(OverlapRule {
                unknown_rank: parse_typed(key, parts[0])?,
                known_rank: parse_typed(key, parts[1])?,
                distance: parse_typed(key, parts[2])?,
                spread: if parts.len() == 4 {
                    parse_typed(key, parts[3])?
                } else {
                    1.0
                },
            })
        })
        .collect()
}

impl ExperimentConfig {
    /// Parse a config file body over the defaults.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CeclError::Config(format!(
                    "line {}: expected 'key = value', got {line:?}",
                    line_no + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(CeclError::Config(format!("duplicate key '{key}'")));
            }
            cfg.apply(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "corpus" => {
                if value != "blobs" {
                    return Err(CeclError::Config(format!(
                        "key 'corpus': unsupported corpus {value:?} (expected 'blobs')"
                    )));
                }
                self.corpus = value.to_string();
            }
            "total_classes" => self.total_classes = parse_typed(key, value)?,
            "known_classes" => self.known_classes = parse_typed(key, value)?,
            "train_per_class" => self.train_per_class = parse_typed(key, value)?,
            "test_per_class" => self.test_per_class = parse_typed(key, value)?,
            "input_dim" => self.input_dim = parse_typed(key, value)?,
            "layout" => {
                self.layout = match value {
                    "random" => BlobLayout::Random,
                    "ring" => BlobLayout::Ring,
                    _ => {
                        return Err(CeclError::Config(format!(
                            "key 'layout': expected random|ring, got {value:?}"
                        )))
                    }
                }
            }
            "center_spread" => self.center_spread = parse_typed(key, value)?,
            "within_std" => self.within_std = parse_typed(key, value)?,
            "overlap_pairs" => self.overlap_pairs = parse_overlaps(key, value)?,
            "noise_kind" => {
                self.noise_kind = match value {
                    "symmetric" => NoiseKind::Symmetric,
                    "asymmetric" => NoiseKind::Asymmetric,
                    _ => {
                        return Err(CeclError::Config(format!(
                            "key 'noise_kind': expected symmetric|asymmetric, got {value:?}"
                        )))
                    }
                }
            }
            "noise_rate" => self.noise_rate = parse_typed(key, value)?,
            "open_set_fraction" => self.open_set_fraction = parse_typed(key, value)?,
            "open_set_labeling" => {
                self.open_set_labeling = match value {
                    "default" => OpenSetLabelingRule::Default,
                    "uniform" => OpenSetLabelingRule::Uniform,
                    "cyclic" => OpenSetLabelingRule::Cyclic,
                    _ => {
                        return Err(CeclError::Config(format!(
                            "key 'open_set_labeling': expected default|uniform|cyclic, got {value:?}"
                        )))
                    }
                }
            }
            "hidden_dim" => self.hidden_dim = parse_typed(key, value)?,
            "proj_hidden_dim" => self.proj_hidden_dim = parse_typed(key, value)?,
            "embed_dim" => self.embed_dim = parse_typed(key, value)?,
            "warmup_epochs" => self.warmup_epochs = parse_typed(key, value)?,
            "warmup_batch_size" => self.warmup_batch_size = parse_typed(key, value)?,
            "warmup_lr" => self.warmup_lr = parse_typed(key, value)?,
            "estimated_noise_rate" => {
                self.estimated_noise_rate = if value == "auto" {
                    None
                } else {
                    Some(parse_typed(key, value)?)
                }
            }
            "confidence_threshold" => self.confidence_threshold = parse_typed(key, value)?,
            "burnin_fraction" => self.burnin_fraction = parse_typed(key, value)?,
            "ramp_fraction" => self.ramp_fraction = parse_typed(key, value)?,
            "epochs" => self.epochs = parse_typed(key, value)?,
            "batch_size" => self.batch_size = parse_typed(key, value)?,
            "lr" => self.lr = parse_typed(key, value)?,
            "sgd_momentum" => self.sgd_momentum = parse_typed(key, value)?,
            "tau" => self.tau = parse_typed(key, value)?,
            "gamma" => self.gamma = parse_typed(key, value)?,
            "beta" => self.beta = parse_typed(key, value)?,
            "temperature" => self.temperature = parse_typed(key, value)?,
            "key_momentum" => self.key_momentum = parse_typed(key, value)?,
            "queue_capacity" => self.queue_capacity = parse_typed(key, value)?,
            "aug_jitter" => self.aug_jitter = parse_typed(key, value)?,
            "warm_start" => self.warm_start = parse_bool(key, value)?,
            "cont_enabled" => self.cont_enabled = parse_bool(key, value)?,
            "osd_enabled" => self.osd_enabled = parse_bool(key, value)?,
            "rdos" => self.rdos = parse_bool(key, value)?,
            "probe_confidence" => self.probe_confidence = parse_typed(key, value)?,
            "probe_train_epochs" => self.probe_train_epochs = parse_typed(key, value)?,
            "sweep_taus" => self.sweep_taus = parse_f64_list(key, value)?,
            "seed" => self.seed = parse_typed(key, value)?,
            "deterministic" => self.deterministic = parse_bool(key, value)?,
            _ => {
                return Err(CeclError::Config(format!("unknown key '{key}'")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.known_classes < 2 || self.known_classes >= self.total_classes {
            return Err(CeclError::Config(format!(
                "known_classes {} must satisfy 2 <= c < total_classes {}",
                self.known_classes, self.total_classes
            )));
        }
        for rule in &self.overlap_pairs {
            if rule.unknown_rank >= self.total_classes - self.known_classes {
                return Err(CeclError::Config(format!(
                    "overlap unknown rank {} out of range ({} unknown classes)",
                    rule.unknown_rank,
                    self.total_classes - self.known_classes
                )));
            }
            if rule.known_rank >= self.known_classes {
                return Err(CeclError::Config(format!(
                    "overlap known rank {} out of range ({} known classes)",
                    rule.known_rank, self.known_classes
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.probe_confidence) {
            return Err(CeclError::Config(format!(
                "probe_confidence {} outside [0, 1]",
                self.probe_confidence
            )));
        }
        self.noise_spec().validate()?;
        self.step1_config().validate()?;
        self.step2_config().validate()
    }

    /// Canonical emission; parsing it reproduces `self` exactly.
    pub fn to_config_string(&self) -> String {
        let overlaps = self
            .overlap_pairs
            .iter()
            .map(|r| format!("{}:{}:{}:{}", r.unknown_rank, r.known_rank, r.distance, r.spread))
            .collect::<Vec<_>>()
            .join(";");
        let taus = self
            .sweep_taus
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let labeling = match self.open_set_labeling {
            OpenSetLabelingRule::Default => "default",
            OpenSetLabelingRule::Uniform => "uniform",
            OpenSetLabelingRule::Cyclic => "cyclic",
        };
        let noise_kind = match self.noise_kind {
            NoiseKind::Symmetric => "symmetric",
            NoiseKind::Asymmetric => "asymmetric",
        };
        format!(
            "# corpus\n\
             corpus = {}\n\
             total_classes = {}\n\
             known_classes = {}\n\
             train_per_class = {}\n\
             test_per_class = {}\n\
             input_dim = {}\n\
             layout = {}\n\
             center_spread = {}\n\
             within_std = {}\n\
             overlap_pairs = {}\n\
             # noise\n\
             noise_kind = {}\n\
             noise_rate = {}\n\
             open_set_fraction = {}\n\
             open_set_labeling = {}\n\
             # model\n\
             hidden_dim = {}\n\
             proj_hidden_dim = {}\n\
             embed_dim = {}\n\
             # step 1\n\
             warmup_epochs = {}\n\
             warmup_batch_size = {}\n\
             warmup_lr = {}\n\
             estimated_noise_rate = {}\n\
             confidence_threshold = {}\n\
             burnin_fraction = {}\n\
             ramp_fraction = {}\n\
             # step 2\n\
             epochs = {}\n\
             batch_size = {}\n\
             lr = {}\n\
             sgd_momentum = {}\n\
             tau = {}\n\
             gamma = {}\n\
             beta = {}\n\
             temperature = {}\n\
             key_momentum = {}\n\
             queue_capacity = {}\n\
             aug_jitter = {}\n\
             warm_start = {}\n\
             # ablation switches\n\
             cont_enabled = {}\n\
             osd_enabled = {}\n\
             rdos = {}\n\
             # probes and sweeps\n\
             probe_confidence = {}\n\
             probe_train_epochs = {}\n\
             sweep_taus = {}\n\
             # run\n\
             seed = {}\n\
             deterministic = {}\n",
            self.corpus,
            self.total_classes,
            self.known_classes,
            self.train_per_class,
            self.test_per_class,
            self.input_dim,
            match self.layout {
                BlobLayout::Random => "random",
                BlobLayout::Ring => "ring",
            },
            self.center_spread,
            self.within_std,
            overlaps,
            noise_kind,
            self.noise_rate,
            self.open_set_fraction,
            labeling,
            self.hidden_dim,
            self.proj_hidden_dim,
            self.embed_dim,
            self.warmup_epochs,
            self.warmup_batch_size,
            self.warmup_lr,
            self.estimated_noise_rate
                .map(|v| v.to_string())
                .unwrap_or_else(|| "auto".into()),
            self.confidence_threshold,
            self.burnin_fraction,
            self.ramp_fraction,
            self.epochs,
            self.batch_size,
            self.lr,
            self.sgd_momentum,
            self.tau,
            self.gamma,
            self.beta,
            self.temperature,
            self.key_momentum,
            self.queue_capacity,
            self.aug_jitter,
            self.warm_start,
            self.cont_enabled,
            self.osd_enabled,
            self.rdos,
            self.probe_confidence,
            self.probe_train_epochs,
            taus,
            self.seed,
            self.deterministic,
        )
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        let unknown_count = self.total_classes - self.known_classes;
        let labeling = match self.open_set_labeling {
            OpenSetLabelingRule::Default => None,
            OpenSetLabelingRule::Uniform => Some(OpenSetLabeling::UniformKnown),
            OpenSetLabelingRule::Cyclic => Some(OpenSetLabeling::ByUnknownClass(
                (0..unknown_count).map(|i| i % self.known_classes).collect(),
            )),
        };
        NoiseSpec {
            known_class_count: self.known_classes,
            noise_kind: self.noise_kind,
            noise_rate: self.noise_rate,
            open_set_fraction: self.open_set_fraction,
            seed: Rng::new(self.seed).fork("noise").into_seed(),
            asym_pair_map: match self.noise_kind {
                NoiseKind::Symmetric => None,
                NoiseKind::Asymmetric => Some(cyclic_pair_map(self.known_classes)),
            },
            open_set_labeling: labeling,
        }
    }

    /// Blob spec with overlap rules resolved against the class split.
    pub fn blob_spec(&self, split: &ClassSplit) -> Result<BlobSpec> {
        let overlap_pairs = self
            .overlap_pairs
            .iter()
            .map(|r| {
                Ok(OverlapPair {
                    moved: *split.unknown.get(r.unknown_rank).ok_or_else(|| {
                        CeclError::Config(format!("unknown rank {} out of range", r.unknown_rank))
                    })?,
                    anchor: *split.known.get(r.known_rank).ok_or_else(|| {
                        CeclError::Config(format!("known rank {} out of range", r.known_rank))
                    })?,
                    distance: r.distance,
                    spread: r.spread,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlobSpec {
            class_count: self.total_classes,
            train_per_class: self.train_per_class,
            test_per_class: self.test_per_class,
            dim: self.input_dim,
            layout: self.layout,
            center_spread: self.center_spread,
            within_std: self.within_std,
            overlap_pairs,
            seed: Rng::new(self.seed).fork("corpus").into_seed(),
        })
    }

    pub fn net_config(&self) -> MlpConfig {
        MlpConfig {
            input_dim: self.input_dim,
            hidden_dim: self.hidden_dim,
            proj_hidden_dim: self.proj_hidden_dim,
            embed_dim: self.embed_dim,
            class_count: self.known_classes,
        }
    }

    pub fn step1_config(&self) -> Step1Config {
        // Auto mode estimates the fraction of examples whose given label is
        // wrong: flipped known-class examples plus the whole open-set share.
        let auto_rate =
            (1.0 - self.open_set_fraction) * self.noise_rate + self.open_set_fraction;
        Step1Config {
            warmup_epochs: self.warmup_epochs,
            batch_size: self.warmup_batch_size,
            lr: self.warmup_lr,
            sgd_momentum: self.sgd_momentum,
            estimated_noise_rate: self.estimated_noise_rate.unwrap_or(auto_rate),
            ramp_fraction: self.ramp_fraction,
            confidence_threshold: self.confidence_threshold,
            burnin_fraction: self.burnin_fraction,
        }
    }

    pub fn step2_config(&self) -> Step2Config {
        Step2Config {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            sgd_momentum: self.sgd_momentum,
            tau: self.tau,
            gamma: self.gamma,
            beta: self.beta,
            temperature: self.temperature,
            key_momentum: self.key_momentum,
            queue_capacity: self.queue_capacity,
            aug_jitter: self.aug_jitter,
            cont_enabled: self.cont_enabled,
            osd_enabled: self.osd_enabled,
            rdos: self.rdos,
        }
    }
}
