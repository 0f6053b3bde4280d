//! Estimated augmentation statistics: per-class main parts, augmented
//! diameters, and the fraction of examples without epsilon-close views.

use serde::{Deserialize, Serialize};

use crate::encoder::{AugmentationSpec, Mlp};
use crate::rng::Rng;
use crate::vecmath::{median, squared_distance};
use crate::{CeclError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugStatsParams {
    /// Augmented views drawn per example; at least 2.
    pub views_per_example: usize,
    /// Embedding-space closeness bound for the S_epsilon membership test.
    pub epsilon: f64,
    /// Main-part diameter target; `None` uses each class's median augmented
    /// pairwise distance.
    pub delta: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAugStats {
    pub class: usize,
    /// Fraction of the class covered by the main part.
    pub sigma_hat: f64,
    /// Realized augmented diameter of the main part.
    pub delta_hat: f64,
    /// The diameter bound the main part was grown under.
    pub delta_target: f64,
    /// Indices (within the class's sample order) of the main part.
    pub main_part: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationStats {
    pub per_class: Vec<ClassAugStats>,
    pub epsilon: f64,
    /// Estimated measure of examples whose sampled views are not all
    /// epsilon-close in embedding space.
    pub r_eps_hat: f64,
}

/// Augmented distance between two examples, approximated as the minimum
/// input-space distance over all sampled view pairs.
fn augmented_distance(views_a: &[Vec<f64>], views_b: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for va in views_a {
        for vb in views_b {
            best = best.min(squared_distance(va, vb));
        }
    }
    best.sqrt()
}

/// Largest subset (greedy, exact on tiny classes) whose pairwise augmented
/// distances stay within `delta`. Grown from every anchor in index order;
/// the largest result wins, earliest anchor breaking ties.
fn greedy_main_part(dists: &[Vec<f64>], delta: f64) -> Vec<usize> {
    let n = dists.len();
    let mut best: Vec<usize> = Vec::new();
    for anchor in 0..n {
        let mut subset = vec![anchor];
        for cand in 0..n {
            if cand == anchor {
                continue;
            }
            if subset.iter().all(|&m| dists[m][cand] <= delta) {
                subset.push(cand);
            }
        }
        if subset.len() > best.len() {
            subset.sort_unstable();
            best = subset;
        }
    }
    best
}

pub fn estimate_augmentation_stats(
    encoder: &Mlp,
    sample: &[(Vec<f64>, usize)],
    aug: &AugmentationSpec,
    params: &AugStatsParams,
) -> Result<AugmentationStats> {
    if params.views_per_example < 2 {
        return Err(CeclError::Config(
            "augmentation budget must be >= 2 views per example".into(),
        ));
    }
    if sample.is_empty() {
        return Err(CeclError::Input("empty sample".into()));
    }

    let root = Rng::new(params.seed);
    let mut views: Vec<Vec<Vec<f64>>> = Vec::with_capacity(sample.len());
    let mut embedded: Vec<Vec<Vec<f64>>> = Vec::with_capacity(sample.len());
    for (i, (feature, _)) in sample.iter().enumerate() {
        let mut rng = root.fork("views").fork_u64(i as u64);
        let vs: Vec<Vec<f64>> = (0..params.views_per_example)
            .map(|_| aug.apply(feature, &mut rng))
            .collect();
        let es = vs.iter().map(|v| encoder.embed(v)).collect::<Result<Vec<_>>>()?;
        views.push(vs);
        embedded.push(es);
    }

    // S_epsilon: all sampled views embed within epsilon of each other.
    let mut outside = 0usize;
    for es in &embedded {
        let mut max_d = 0.0f64;
        for i in 0..es.len() {
            for j in (i + 1)..es.len() {
                max_d = max_d.max(squared_distance(&es[i], &es[j]).sqrt());
            }
        }
        if max_d > params.epsilon {
            outside += 1;
        }
    }
    let r_eps_hat = outside as f64 / sample.len() as f64;

    let class_count = sample.iter().map(|(_, c)| c + 1).max().unwrap();
    let mut per_class = Vec::new();
    for class in 0..class_count {
        let members: Vec<usize> = (0..sample.len()).filter(|&i| sample[i].1 == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() == 1 {
            per_class.push(ClassAugStats {
                class,
                sigma_hat: 1.0,
                delta_hat: 0.0,
                delta_target: params.delta.unwrap_or(0.0),
                main_part: vec![0],
            });
            continue;
        }
        let m = members.len();
        let mut dists = vec![vec![0.0; m]; m];
        let mut flat = Vec::with_capacity(m * (m - 1) / 2);
        for a in 0..m {
            for b in (a + 1)..m {
                let d = augmented_distance(&views[members[a]], &views[members[b]]);
                dists[a][b] = d;
                dists[b][a] = d;
                flat.push(d);
            }
        }
        let delta_target = params.delta.unwrap_or_else(|| median(&flat));
        let main_part = greedy_main_part(&dists, delta_target);
        let mut delta_hat = 0.0f64;
        for (ia, &a) in main_part.iter().enumerate() {
            for &b in &main_part[(ia + 1)..] {
                delta_hat = delta_hat.max(dists[a][b]);
            }
        }
        per_class.push(ClassAugStats {
            class,
            sigma_hat: main_part.len() as f64 / m as f64,
            delta_hat,
            delta_target,
            main_part,
        });
    }

    Ok(AugmentationStats {
        per_class,
        epsilon: params.epsilon,
        r_eps_hat,
    })
}
