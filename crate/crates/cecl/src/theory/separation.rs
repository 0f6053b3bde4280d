//! Inter-centroid similarity under two pool conditions.
//!
//! The delimiter mechanism predicts that training with distinguishable
//! open-set negatives in the pool drives known-class centroids further
//! apart: a more negative uniformity raises the `-uniformity` lower bound
//! on centroid separation. The report compares a with-delimiters condition
//! against a without-delimiters condition on max/mean centroid inner
//! products and uniformity.

use serde::{Deserialize, Serialize};

use crate::vecmath::{dot, mean_vec, norm};
use crate::{CeclError, Result};

/// Per-true-class centroids with priors and the full inner-product table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub centroids: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
    /// `gram[k][l] = centroid_k . centroid_l`
    pub gram: Vec<Vec<f64>>,
    /// Max embedding norm over the input set (the representation radius).
    pub radius: f64,
}

/// Centroids as plain per-class means of the given embeddings. Needs at
/// least two non-empty classes.
pub fn cluster_stats(groups: &[Vec<Vec<f64>>]) -> Result<ClusterStats> {
    let non_empty = groups.iter().filter(|g| !g.is_empty()).count();
    if non_empty < 2 {
        return Err(CeclError::Domain(format!(
            "centroid separation needs >= 2 non-empty classes, got {non_empty}"
        )));
    }
    let total: usize = groups.iter().map(|g| g.len()).sum();
    let mut centroids = Vec::with_capacity(groups.len());
    let mut priors = Vec::with_capacity(groups.len());
    let mut radius = 0.0f64;
    for group in groups {
        if group.is_empty() {
            return Err(CeclError::Domain(
                "every class must have at least one embedding".into(),
            ));
        }
        for e in group {
            radius = radius.max(norm(e));
        }
        let refs: Vec<&[f64]> = group.iter().map(|v| v.as_slice()).collect();
        centroids.push(mean_vec(&refs));
        priors.push(group.len() as f64 / total as f64);
    }
    let k = centroids.len();
    let mut gram = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            gram[a][b] = dot(&centroids[a], &centroids[b]);
        }
    }
    Ok(ClusterStats {
        centroids,
        priors,
        gram,
        radius,
    })
}

impl ClusterStats {
    pub fn max_offdiag(&self) -> f64 {
        let k = self.gram.len();
        let mut best = f64::NEG_INFINITY;
        for a in 0..k {
            for b in 0..k {
                if a != b {
                    best = best.max(self.gram[a][b]);
                }
            }
        }
        best
    }

    pub fn mean_offdiag(&self) -> f64 {
        let k = self.gram.len();
        let mut sum = 0.0;
        let mut count = 0usize;
        for a in 0..k {
            for b in 0..k {
                if a != b {
                    sum += self.gram[a][b];
                    count += 1;
                }
            }
        }
        sum / count as f64
    }
}

/// One evaluated condition: centroids of the known classes plus the
/// uniformity of the pool that condition trains/evaluates against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCondition {
    pub label: String,
    pub stats: ClusterStats,
    pub uniformity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationSummary {
    pub label: String,
    pub max_offdiag: f64,
    pub mean_offdiag: f64,
    pub uniformity: f64,
}

impl SeparationSummary {
    fn of(c: &SeparationCondition) -> Self {
        SeparationSummary {
            label: c.label.clone(),
            max_offdiag: c.stats.max_offdiag(),
            mean_offdiag: c.stats.mean_offdiag(),
            uniformity: c.uniformity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub with_delimiters: SeparationSummary,
    pub without_delimiters: SeparationSummary,
    /// True iff the delimiter condition achieved a strictly smaller max
    /// inter-centroid inner product.
    pub max_similarity_reduced: bool,
    /// `(-uniformity with) - (-uniformity without)`: positive means the
    /// delimiter condition has the higher separation bound.
    pub uniformity_bound_gain: f64,
}

pub fn centroid_separation_report(
    with_delimiters: &SeparationCondition,
    without_delimiters: &SeparationCondition,
) -> Result<SeparationReport> {
    let with_summary = SeparationSummary::of(with_delimiters);
    let without_summary = SeparationSummary::of(without_delimiters);
    let reduced = with_summary.max_offdiag < without_summary.max_offdiag;
    let gain = -with_summary.uniformity - (-without_summary.uniformity);
    Ok(SeparationReport {
        with_delimiters: with_summary,
        without_delimiters: without_summary,
        max_similarity_reduced: reduced,
        uniformity_bound_gain: gain,
    })
}
