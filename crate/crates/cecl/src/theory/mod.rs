//! Empirical instrumentation of the alignment/uniformity decomposition and
//! the centroid-separation direction of the delimiter mechanism.

mod augstats;
mod metrics;
mod separation;

pub use augstats::{estimate_augmentation_stats, AugStatsParams, AugmentationStats, ClassAugStats};
pub use metrics::{alignment_loss, uniformity_loss, uniformity_pair_sum};
pub use separation::{
    centroid_separation_report, cluster_stats, ClusterStats, SeparationCondition,
    SeparationReport, SeparationSummary,
};
