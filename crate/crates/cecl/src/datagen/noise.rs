//! Label-noise injection and open-set dataset assembly.

use serde::{Deserialize, Serialize};

use super::{CleanCorpus, DatasetProvenance, NoisyDataset, NoisyExample, TestExample};
use crate::rng::Rng;
use crate::{CeclError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Symmetric,
    Asymmetric,
}

/// How unknown-class training examples receive their known-class given label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpenSetLabeling {
    /// Uniform over the known classes (default for symmetric noise).
    UniformKnown,
    /// Fixed assignment: entry `i` is the remapped known label given to every
    /// example of the `i`-th unknown class (default for asymmetric noise,
    /// where the assignment is cyclic over the known labels).
    ByUnknownClass(Vec<usize>),
}

/// Full noise configuration. Everything needed to reproduce the corruption
/// is carried here and lands in the dataset's provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub known_class_count: usize,
    pub noise_kind: NoiseKind,
    pub noise_rate: f64,
    /// Fraction of the final training set drawn from unknown classes.
    pub open_set_fraction: f64,
    pub seed: u64,
    /// Asymmetric flip targets per known label; `None` selects the cyclic
    /// next-class map.
    pub asym_pair_map: Option<Vec<usize>>,
    /// `None` selects the kind-dependent default labeling for open-set
    /// examples.
    pub open_set_labeling: Option<OpenSetLabeling>,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.known_class_count < 2 {
            return Err(CeclError::Config(format!(
                "need at least 2 known classes, got {}",
                self.known_class_count
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(CeclError::Config(format!(
                "noise_rate {} outside [0, 1]",
                self.noise_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.open_set_fraction) {
            return Err(CeclError::Config(format!(
                "open_set_fraction {} outside [0, 1]",
                self.open_set_fraction
            )));
        }
        Ok(())
    }

    /// Seed for the known/unknown class split; exposed so callers can
    /// reproduce the split before building the dataset.
    pub fn split_seed(&self) -> u64 {
        Rng::new(self.seed).fork("class-split").into_seed()
    }
}

/// Known/unknown class split over original corpus class ids (both sorted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSplit {
    pub known: Vec<usize>,
    pub unknown: Vec<usize>,
}

/// Randomly select `c` known classes out of `class_count`; the rest are
/// unknown. Deterministic given the seed.
pub fn split_class_ids(class_count: usize, c: usize, seed: u64) -> Result<ClassSplit> {
    if c < 2 || c >= class_count {
        return Err(CeclError::Config(format!(
            "known class count {c} must satisfy 2 <= c < {class_count}"
        )));
    }
    let mut ids: Vec<usize> = (0..class_count).collect();
    Rng::new(seed).fork("class-split-shuffle").shuffle(&mut ids);
    let mut known: Vec<usize> = ids[..c].to_vec();
    let mut unknown: Vec<usize> = ids[c..].to_vec();
    known.sort_unstable();
    unknown.sort_unstable();
    Ok(ClassSplit { known, unknown })
}

/// Randomly select `c` known classes of a corpus; the rest are unknown.
pub fn split_known_unknown(corpus: &CleanCorpus, c: usize, seed: u64) -> Result<ClassSplit> {
    split_class_ids(corpus.class_count, c, seed)
}

/// Exact number of examples to corrupt so the realized rate matches the
/// nominal rate up to rounding.
fn flip_count(n: usize, rate: f64) -> usize {
    (rate * n as f64).round() as usize
}

/// Symmetric noise: a seeded choice of `round(rate * n)` examples each gets a
/// uniformly random *different* known class.
pub fn inject_symmetric_noise(labels: &[usize], rate: f64, c: usize, seed: u64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(CeclError::Config(format!("rate {rate} outside [0, 1]")));
    }
    if c < 2 {
        return Err(CeclError::Config("symmetric noise needs c >= 2".into()));
    }
    let mut out = labels.to_vec();
    let root = Rng::new(seed);
    let mut pick = root.fork("select");
    let mut target = root.fork("target");
    for idx in pick.sample_indices(labels.len(), flip_count(labels.len(), rate)) {
        // Offset in 1..c skips the original class, so every selected example
        // really flips.
        let offset = 1 + target.below(c - 1);
        out[idx] = (labels[idx] + offset) % c;
    }
    Ok(out)
}

/// The default asymmetric pairing: class k flips to (k + 1) mod c.
pub fn cyclic_pair_map(c: usize) -> Vec<usize> {
    (0..c).map(|k| (k + 1) % c).collect()
}

/// Asymmetric noise: selected examples flip along a fixed class-to-class map.
pub fn inject_asymmetric_noise(
    labels: &[usize],
    rate: f64,
    pair_map: &[usize],
    seed: u64,
) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(CeclError::Config(format!("rate {rate} outside [0, 1]")));
    }
    for (src, &dst) in pair_map.iter().enumerate() {
        if dst >= pair_map.len() {
            return Err(CeclError::Config(format!(
                "pair_map target {dst} out of range for {} classes",
                pair_map.len()
            )));
        }
        if dst == src {
            return Err(CeclError::Config(format!(
                "pair_map has a fixed point at class {src}"
            )));
        }
    }
    let mut out = labels.to_vec();
    let mut pick = Rng::new(seed).fork("select");
    for idx in pick.sample_indices(labels.len(), flip_count(labels.len(), rate)) {
        let src = labels[idx];
        if src >= pair_map.len() {
            return Err(CeclError::Input(format!(
                "label {src} out of range for pair_map of {} classes",
                pair_map.len()
            )));
        }
        out[idx] = pair_map[src];
    }
    Ok(out)
}

/// Full open-set noisy dataset construction.
///
/// Known-class training examples keep their (remapped) labels except for the
/// injected flips. Unknown-class training examples are sampled to make up
/// `open_set_fraction` of the final training set and receive known-class
/// given labels; their hidden truth is the open-set sentinel `c`. The test
/// split keeps only known classes and stays clean.
pub fn build_open_set_noise(corpus: &CleanCorpus, spec: &NoiseSpec) -> Result<NoisyDataset> {
    spec.validate()?;
    corpus.validate()?;
    let c = spec.known_class_count;
    let split = split_known_unknown(corpus, c, spec.split_seed())?;

    let mut remap = vec![usize::MAX; corpus.class_count];
    for (dense, &orig) in split.known.iter().enumerate() {
        remap[orig] = dense;
    }

    let known_train: Vec<&super::CleanExample> = corpus
        .train
        .iter()
        .filter(|e| remap[e.label] != usize::MAX)
        .collect();
    let unknown_train: Vec<&super::CleanExample> = corpus
        .train
        .iter()
        .filter(|e| remap[e.label] == usize::MAX)
        .collect();

    let clean_labels: Vec<usize> = known_train.iter().map(|e| remap[e.label]).collect();
    let noise_seed = Rng::new(spec.seed).fork("closed-set-noise").into_seed();
    let noisy_labels = match spec.noise_kind {
        NoiseKind::Symmetric => inject_symmetric_noise(&clean_labels, spec.noise_rate, c, noise_seed)?,
        NoiseKind::Asymmetric => {
            let map = spec.asym_pair_map.clone().unwrap_or_else(|| cyclic_pair_map(c));
            inject_asymmetric_noise(&clean_labels, spec.noise_rate, &map, noise_seed)?
        }
    };

    let mut examples: Vec<NoisyExample> = known_train
        .iter()
        .zip(&clean_labels)
        .zip(&noisy_labels)
        .enumerate()
        .map(|(id, ((ex, &truth), &given))| NoisyExample {
            id,
            feature: ex.feature.clone(),
            given,
            truth,
        })
        .collect();

    // open_count / (open_count + known) == open_set_fraction, up to rounding.
    let phi = spec.open_set_fraction;
    let open_count = if phi > 0.0 {
        (phi / (1.0 - phi) * known_train.len() as f64).round() as usize
    } else {
        0
    };
    if open_count > 0 {
        if unknown_train.is_empty() {
            return Err(CeclError::Config(
                "open_set_fraction > 0 but the unknown class set has no training examples".into(),
            ));
        }
        if open_count > unknown_train.len() {
            return Err(CeclError::Config(format!(
                "open_set_fraction {phi} needs {open_count} unknown-class examples, only {} available",
                unknown_train.len()
            )));
        }
        let labeling = spec.open_set_labeling.clone().unwrap_or(match spec.noise_kind {
            NoiseKind::Symmetric => OpenSetLabeling::UniformKnown,
            NoiseKind::Asymmetric => OpenSetLabeling::ByUnknownClass(
                (0..split.unknown.len()).map(|i| i % c).collect(),
            ),
        });
        if let OpenSetLabeling::ByUnknownClass(map) = &labeling {
            if map.len() != split.unknown.len() || map.iter().any(|&l| l >= c) {
                return Err(CeclError::Config(format!(
                    "open-set label map must give one known label per {} unknown classes",
                    split.unknown.len()
                )));
            }
        }
        let mut unknown_rank = vec![usize::MAX; corpus.class_count];
        for (rank, &orig) in split.unknown.iter().enumerate() {
            unknown_rank[orig] = rank;
        }
        let root = Rng::new(spec.seed);
        let mut sample_rng = root.fork("open-set-sample");
        let mut label_rng = root.fork("open-set-label");
        let picked = sample_rng.sample_indices(unknown_train.len(), open_count);
        for pool_idx in picked {
            let ex = unknown_train[pool_idx];
            let given = match &labeling {
                OpenSetLabeling::UniformKnown => label_rng.below(c),
                OpenSetLabeling::ByUnknownClass(map) => map[unknown_rank[ex.label]],
            };
            examples.push(NoisyExample {
                id: examples.len(),
                feature: ex.feature.clone(),
                given,
                truth: c,
            });
        }
    }

    let test: Vec<TestExample> = corpus
        .test
        .iter()
        .filter(|e| remap[e.label] != usize::MAX)
        .map(|e| TestExample {
            feature: e.feature.clone(),
            label: remap[e.label],
        })
        .collect();

    Ok(NoisyDataset {
        examples,
        known_class_count: c,
        dim: corpus.dim,
        test,
        provenance: DatasetProvenance {
            spec: spec.clone(),
            split: split.clone(),
            known_label_map: split.known,
        },
    })
}
