//! Experiment harness: configs, the pipeline runner, probes, retraining and
//! sweep experiments, and report emission.

mod checkpoint;
mod config;
mod csos;
mod pca;
pub mod plot;
mod probe;
mod report;
mod runner;
mod sweep;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use config::{ExperimentConfig, OpenSetLabelingRule, OverlapRule};
pub use csos::{cs_vs_csos_experiment, CsosOutcome};
pub use pca::pca_2d;
pub use probe::{class_expansion_probe, train_classifier, TransitionMatrix};
pub use report::{emit_reports, parse_epoch_logs, ReportFiles};
pub use runner::{
    build_corpus_and_split, last_window_stats, open_set_pool, run_experiment, train_remaining,
    EpochLog, OsdDiagnostic, RunPaths, RunSummary, FINAL_METRIC_WINDOW,
};
pub use sweep::{sweep_csv, tau_sweep, SweepRow};
