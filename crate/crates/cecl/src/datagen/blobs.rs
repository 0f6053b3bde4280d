//! Gaussian blob corpora with controllable class overlap.

use serde::{Deserialize, Serialize};

use super::{CleanCorpus, CleanExample};
use crate::rng::Rng;
use crate::vecmath::normalize;
use crate::{CeclError, Result};

/// Places the `moved` class center at `distance` from the `anchor` class
/// center, making the moved class indistinct (small distance) or clearly
/// separable (large distance) by construction. `spread` scales the moved
/// class's within-class deviation: values above 1 turn it into a diffuse
/// cloud rather than a tight cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapPair {
    pub moved: usize,
    pub anchor: usize,
    pub distance: f64,
    pub spread: f64,
}

/// How class centers are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlobLayout {
    /// Centers drawn from an isotropic Gaussian scaled by `center_spread`.
    Random,
    /// Centers evenly spaced on a circle of radius `center_spread` in the
    /// first two dimensions: every adjacent pair is equally confusable, so
    /// no random near-duplicate class pair dominates the benchmark.
    Ring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub class_count: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub dim: usize,
    pub layout: BlobLayout,
    /// Center scale: Gaussian std for `Random`, circle radius for `Ring`.
    pub center_spread: f64,
    /// Within-class standard deviation.
    pub within_std: f64,
    pub overlap_pairs: Vec<OverlapPair>,
    pub seed: u64,
}

/// Balanced Gaussian clusters; overlap pairs then re-place selected centers
/// at an exact distance from their anchor center.
pub fn make_synthetic_blobs(spec: &BlobSpec) -> Result<CleanCorpus> {
    if spec.dim < 2 {
        return Err(CeclError::Config(format!(
            "blob dim must be >= 2, got {}",
            spec.dim
        )));
    }
    if spec.class_count < 2 {
        return Err(CeclError::Config("need at least 2 classes".into()));
    }
    for p in &spec.overlap_pairs {
        if p.moved >= spec.class_count || p.anchor >= spec.class_count {
            return Err(CeclError::Config(format!(
                "overlap pair ({}, {}) out of range for {} classes",
                p.moved, p.anchor, spec.class_count
            )));
        }
        if p.moved == p.anchor {
            return Err(CeclError::Config(
                "overlap pair cannot move a class onto itself".into(),
            ));
        }
        if p.distance < 0.0 {
            return Err(CeclError::Config("overlap distance must be >= 0".into()));
        }
        if p.spread <= 0.0 {
            return Err(CeclError::Config("overlap spread must be > 0".into()));
        }
    }

    let root = Rng::new(spec.seed);
    let mut center_rng = root.fork("centers");
    let mut centers: Vec<Vec<f64>> = match spec.layout {
        BlobLayout::Random => (0..spec.class_count)
            .map(|_| {
                let mut v = center_rng.normal_vec(spec.dim);
                for x in v.iter_mut() {
                    *x *= spec.center_spread;
                }
                v
            })
            .collect(),
        BlobLayout::Ring => (0..spec.class_count)
            .map(|i| {
                let angle = std::f64::consts::TAU * i as f64 / spec.class_count as f64;
                let mut v = vec![0.0; spec.dim];
                v[0] = spec.center_spread * angle.cos();
                v[1] = spec.center_spread * angle.sin();
                v
            })
            .collect(),
    };

    // Overlap placement happens after all base centers exist so anchors do
    // not depend on pair order.
    let mut dir_rng = root.fork("overlap-directions");
    for p in &spec.overlap_pairs {
        let mut dir = dir_rng.normal_vec(spec.dim);
        normalize(&mut dir)?;
        let anchor = centers[p.anchor].clone();
        centers[p.moved] = anchor
            .iter()
            .zip(&dir)
            .map(|(a, d)| a + p.distance * d)
            .collect();
    }

    let mut class_std = vec![spec.within_std; spec.class_count];
    for p in &spec.overlap_pairs {
        class_std[p.moved] = spec.within_std * p.spread;
    }

    let draw = |rng: &mut Rng, n_per_class: usize| -> Vec<CleanExample> {
        let mut out = Vec::with_capacity(n_per_class * spec.class_count);
        for (label, center) in centers.iter().enumerate() {
            for _ in 0..n_per_class {
                let feature: Vec<f64> = center
                    .iter()
                    .map(|&c| c + class_std[label] * rng.normal())
                    .collect();
                out.push(CleanExample { feature, label });
            }
        }
        out
    };

    let mut train_rng = root.fork("train-examples");
    let mut test_rng = root.fork("test-examples");
    let corpus = CleanCorpus {
        class_count: spec.class_count,
        dim: spec.dim,
        train: draw(&mut train_rng, spec.train_per_class),
        test: draw(&mut test_rng, spec.test_per_class),
    };
    corpus.validate()?;
    Ok(corpus)
}
