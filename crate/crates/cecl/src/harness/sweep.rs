//! Threshold sensitivity sweep: one full run per tau, shared seed.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::run_experiment;
use crate::{CeclError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub final_acc_mean: f64,
    pub final_acc_std: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("tau,final_acc_mean,final_acc_std\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.tau, r.final_acc_mean, r.final_acc_std));
    }
    out
}

/// Run the configured pipeline once per tau in `cfg.sweep_taus`, everything
/// else (seed included) held fixed. Each run lands in `out/tau_<value>/`.
pub fn tau_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<SweepRow>> {
    if cfg.sweep_taus.len() < 2 {
        return Err(CeclError::Config(format!(
            "tau sweep needs at least 2 values, got {}",
            cfg.sweep_taus.len()
        )));
    }
    fs::create_dir_all(out_dir)?;
    let mut rows = Vec::with_capacity(cfg.sweep_taus.len());
    for &tau in &cfg.sweep_taus {
        let mut sub = cfg.clone();
        sub.tau = tau;
        let summary = run_experiment(&sub, &out_dir.join(format!("tau_{tau}")))?;
        rows.push(SweepRow {
            tau,
            final_acc_mean: summary.final_acc_mean,
            final_acc_std: summary.final_acc_std,
        });
    }
    fs::write(out_dir.join("sweep.csv"), sweep_csv(&rows))?;
    Ok(rows)
}
