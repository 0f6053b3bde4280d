//! End-to-end experiment runner: datagen, step 1, step 2, artifacts.
//!
//! A run directory contains the exact config that produced it, the dataset,
//! the step-1 artifact, a JSON-lines epoch log, the final checkpoint, final
//! train-set embeddings, the open-set transition matrix, and a summary whose
//! headline number is the mean/std test accuracy over the last (up to) ten
//! epochs. Nothing in the run directory depends on wall-clock time, so a
//! deterministic rerun reproduces every file byte-for-byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::checkpoint::save_checkpoint;
use super::config::ExperimentConfig;
use super::probe::class_expansion_probe;
use crate::cecl_core::{
    batch_f_flags, init_train_state, test_accuracy, train_epoch, TrainState,
};
use crate::datagen::{
    build_open_set_noise, make_synthetic_blobs, save_dataset, split_class_ids, CleanCorpus,
    NoisyDataset,
};
use crate::encoder::{EmbeddingRecord, Partition};
use crate::step1::{
    partition_and_relabel, save_step1_artifact, update_correction_record, warmup_train,
    CoarseLabeledDataset, Step1Artifact,
};
use crate::vecmath::mean_std;
use crate::Result;

pub const SUMMARY_VERSION: u32 = 1;
/// Final metric window: mean/std of test accuracy over the last N epochs.
pub const FINAL_METRIC_WINDOW: usize = 10;

#[derive(Debug, Clone)]
pub struct RunPaths {
    pub root: PathBuf,
    pub config: PathBuf,
    pub log: PathBuf,
    pub dataset_dir: PathBuf,
    pub step1: PathBuf,
    pub epochs: PathBuf,
    pub checkpoint: PathBuf,
    pub embeddings: PathBuf,
    pub transition_matrix: PathBuf,
    pub summary: PathBuf,
}

impl RunPaths {
    pub fn new(root: &Path) -> RunPaths {
        RunPaths {
            root: root.to_path_buf(),
            config: root.join("config.cfg"),
            log: root.join("run.log"),
            dataset_dir: root.join("dataset"),
            step1: root.join("step1.json"),
            epochs: root.join("epochs.jsonl"),
            checkpoint: root.join("checkpoint.json"),
            embeddings: root.join("embeddings.tsv"),
            transition_matrix: root.join("transition_matrix.csv"),
            summary: root.join("summary.json"),
        }
    }
}

/// One line of `epochs.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub l_cls: f64,
    pub l_cont: f64,
    pub l_total: f64,
    pub clean_count: usize,
    pub f1_total: usize,
    pub delimiter_total: usize,
    pub prototype_drift: f64,
    pub lr: f64,
    pub test_acc: f64,
    pub warning_batches: usize,
}

/// Open-set detection quality of the final state. This is a diagnostic that
/// goes beyond the evaluation protocol (which scores closed-set test
/// accuracy only); ground truth is consulted here and nowhere in training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsdDiagnostic {
    pub predicted_delimiters: usize,
    pub open_set_count: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: u32,
    pub known_class_count: usize,
    pub epochs: usize,
    pub last_window: usize,
    pub final_acc_mean: f64,
    pub final_acc_std: f64,
    pub final_test_acc: f64,
    pub clean_count: usize,
    pub noisy_count: usize,
    pub open_set_train_count: usize,
    pub osd_diagnostic: OsdDiagnostic,
}

/// Mean/std of the last `window` entries (all of them if fewer).
pub fn last_window_stats(values: &[f64], window: usize) -> (f64, f64, usize) {
    let w = window.min(values.len());
    let tail = &values[values.len() - w..];
    let (mean, std) = mean_std(tail);
    (mean, std, w)
}

struct StageLogger {
    file: fs::File,
}

impl StageLogger {
    fn new(path: &Path) -> Result<StageLogger> {
        Ok(StageLogger {
            file: fs::File::create(path)?,
        })
    }

    fn line(&mut self, msg: &str) -> Result<()> {
        writeln!(self.file, "{msg}")?;
        self.file.flush()?;
        Ok(())
    }
}

/// Corpus and split exactly as the runner builds them; exposed so probes and
/// retraining experiments share the construction.
pub fn build_corpus_and_split(
    cfg: &ExperimentConfig,
) -> Result<(CleanCorpus, crate::datagen::ClassSplit)> {
    let spec = cfg.noise_spec();
    let split = split_class_ids(cfg.total_classes, cfg.known_classes, spec.split_seed())?;
    let corpus = make_synthetic_blobs(&cfg.blob_spec(&split)?)?;
    Ok((corpus, split))
}

/// Unknown-class training examples with their original class ids; the pool
/// the class-expansion probe pseudo-labels.
pub fn open_set_pool(
    corpus: &CleanCorpus,
    split: &crate::datagen::ClassSplit,
) -> Vec<(Vec<f64>, usize)> {
    corpus
        .train
        .iter()
        .filter(|e| split.unknown.contains(&e.label))
        .map(|e| (e.feature.clone(), e.label))
        .collect()
}

/// Train step 2 from `state` until the configured epoch count, sending one
/// [`EpochLog`] per epoch to `sink`.
pub fn train_remaining(
    state: &mut TrainState,
    dataset: &NoisyDataset,
    coarse: &CoarseLabeledDataset,
    mut sink: impl FnMut(&EpochLog) -> Result<()>,
) -> Result<Vec<EpochLog>> {
    let mut logs = Vec::new();
    while state.epoch < state.step2.epochs {
        let (metrics, _) = train_epoch(state, dataset, coarse)?;
        let log = EpochLog {
            epoch: metrics.epoch,
            l_cls: metrics.l_cls,
            l_cont: metrics.l_cont,
            l_total: metrics.l_total,
            clean_count: metrics.clean_count,
            f1_total: metrics.f1_total,
            delimiter_total: metrics.delimiter_total,
            prototype_drift: metrics.prototype_drift,
            lr: metrics.lr,
            test_acc: test_accuracy(&state.query, &dataset.test)?,
            warning_batches: metrics.warning_batches,
        };
        sink(&log)?;
        logs.push(log);
    }
    Ok(logs)
}

fn final_f_flags(
    state: &TrainState,
    dataset: &NoisyDataset,
    coarse: &CoarseLabeledDataset,
) -> Result<Vec<bool>> {
    let records: Vec<EmbeddingRecord> = dataset
        .examples
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            let q = state.query.embed(&ex.feature)?;
            Ok(EmbeddingRecord {
                k: q.clone(),
                q,
                y_prime: coarse.y_prime[i],
                partition: coarse.partition[i],
                example_id: ex.id,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    batch_f_flags(&records, &state.bank, &state.step2.params().selection())
}

fn osd_diagnostic(
    dataset: &NoisyDataset,
    coarse: &CoarseLabeledDataset,
    f_flags: &[bool],
) -> OsdDiagnostic {
    let open_set_count = dataset.open_set_count();
    let mut predicted = 0usize;
    let mut true_positive = 0usize;
    for (i, ex) in dataset.examples.iter().enumerate() {
        let is_delimiter = coarse.partition[i] == Partition::Noisy && !f_flags[i];
        if is_delimiter {
            predicted += 1;
            if ex.truth == dataset.known_class_count {
                true_positive += 1;
            }
        }
    }
    OsdDiagnostic {
        predicted_delimiters: predicted,
        open_set_count,
        precision: (predicted > 0).then(|| true_positive as f64 / predicted as f64),
        recall: (open_set_count > 0).then(|| true_positive as f64 / open_set_count as f64),
    }
}

fn write_embeddings_tsv(
    path: &Path,
    state: &TrainState,
    dataset: &NoisyDataset,
    coarse: &CoarseLabeledDataset,
    f_flags: &[bool],
) -> Result<()> {
    let mut out = String::new();
    for (i, ex) in dataset.examples.iter().enumerate() {
        let q = state.query.embed(&ex.feature)?;
        let partition = match coarse.partition[i] {
            Partition::Clean => "clean",
            Partition::Noisy => "noisy",
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}",
            ex.id,
            ex.truth,
            coarse.y_prime[i],
            partition,
            u8::from(f_flags[i])
        ));
        for v in &q {
            out.push_str(&format!("\t{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Run the full pipeline into `out_dir`. Any stage error is wrapped with the
/// stage name; logs written so far stay on disk.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let paths = RunPaths::new(out_dir);
    fs::create_dir_all(&paths.root)?;
    fs::write(&paths.config, cfg.to_config_string())?;
    let mut log = StageLogger::new(&paths.log)?;

    // datagen
    log.line("stage datagen: start")?;
    let (corpus, split, dataset) = (|| -> Result<_> {
        let (corpus, split) = build_corpus_and_split(cfg)?;
        let dataset = build_open_set_noise(&corpus, &cfg.noise_spec())?;
        save_dataset(&dataset, &paths.dataset_dir)?;
        Ok((corpus, split, dataset))
    })()
    .map_err(|e| e.in_stage("datagen"))?;
    log.line(&format!(
        "stage datagen: done ({} train, {} open-set, {} test)",
        dataset.examples.len(),
        dataset.open_set_count(),
        dataset.test.len()
    ))?;

    // step 1
    log.line("stage step1: start")?;
    let (coarse, warm_start) = (|| -> Result<_> {
        let s1 = cfg.step1_config();
        let outcome = warmup_train(
            &dataset,
            &s1,
            cfg.net_config(),
            crate::rng::Rng::new(cfg.seed).fork("step1").into_seed(),
        )?;
        let record =
            update_correction_record(&outcome.history, s1.confidence_threshold, s1.burnin_fraction)?;
        let coarse = partition_and_relabel(&dataset, &record, &outcome.net_a, &outcome.net_b)?;
        let artifact = Step1Artifact::new(coarse.clone(), record, outcome.history.clone());
        save_step1_artifact(&artifact, &paths.step1)?;
        Ok((coarse, outcome.net_a))
    })()
    .map_err(|e| e.in_stage("step1"))?;
    log.line(&format!(
        "stage step1: done ({} clean, {} noisy)",
        coarse.clean_count(),
        coarse.noisy_count()
    ))?;

    // step 2
    log.line("stage train: start")?;
    let (state, epoch_logs) = (|| -> Result<_> {
        let mut state = init_train_state(
            &dataset,
            &coarse,
            cfg.warm_start.then_some(&warm_start),
            cfg.net_config(),
            cfg.step2_config(),
            crate::rng::Rng::new(cfg.seed).fork("step2").into_seed(),
        )?;
        let mut file = fs::File::create(&paths.epochs)?;
        let logs = train_remaining(&mut state, &dataset, &coarse, |log| {
            writeln!(file, "{}", serde_json::to_string(log)?)?;
            Ok(())
        })?;
        file.flush()?;
        save_checkpoint(&paths.checkpoint, cfg, &state)?;
        Ok((state, logs))
    })()
    .map_err(|e| e.in_stage("train"))?;
    log.line("stage train: done")?;

    // final artifacts
    log.line("stage artifacts: start")?;
    let summary = (|| -> Result<_> {
        let f_flags = final_f_flags(&state, &dataset, &coarse)?;
        write_embeddings_tsv(&paths.embeddings, &state, &dataset, &coarse, &f_flags)?;

        let pool = open_set_pool(&corpus, &split);
        let matrix_csv = if pool.is_empty() {
            let mut header = String::from("source_class,count");
            for c in 0..dataset.known_class_count {
                header.push_str(&format!(",known_{c}"));
            }
            header.push_str(",concentration\n");
            header
        } else {
            class_expansion_probe(&state.query, &pool)?.to_csv()
        };
        fs::write(&paths.transition_matrix, matrix_csv)?;

        let accs: Vec<f64> = epoch_logs.iter().map(|l| l.test_acc).collect();
        let (mean, std, window) = last_window_stats(&accs, FINAL_METRIC_WINDOW);
        let summary = RunSummary {
            version: SUMMARY_VERSION,
            known_class_count: dataset.known_class_count,
            epochs: epoch_logs.len(),
            last_window: window,
            final_acc_mean: mean,
            final_acc_std: std,
            final_test_acc: accs.last().copied().unwrap_or(0.0),
            clean_count: coarse.clean_count(),
            noisy_count: coarse.noisy_count(),
            open_set_train_count: dataset.open_set_count(),
            osd_diagnostic: osd_diagnostic(&dataset, &coarse, &f_flags),
        };
        fs::write(&paths.summary, serde_json::to_string_pretty(&summary)?)?;
        Ok(summary)
    })()
    .map_err(|e| e.in_stage("artifacts"))?;
    log.line(&format!(
        "stage artifacts: done (final acc {:.4} +/- {:.4} over last {} epochs)",
        summary.final_acc_mean, summary.final_acc_std, summary.last_window
    ))?;

    Ok(summary)
}
