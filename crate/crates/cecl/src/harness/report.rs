//! Report emission: plots and CSVs derived from persisted run artifacts.
//!
//! Everything plotted is read back from the run directory, never from live
//! training state, so every figure is recomputable from what is on disk.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pca::pca_2d;
use super::plot;
use super::probe::TransitionMatrix;
use super::runner::{EpochLog, RunPaths, RunSummary};
use crate::{CeclError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFiles {
    pub accuracy_curve_csv: PathBuf,
    pub accuracy_curve_svg: PathBuf,
    pub transition_matrix_csv: PathBuf,
    pub transition_matrix_svg: PathBuf,
    pub embedding_scatter_csv: PathBuf,
    pub embedding_scatter_svg: PathBuf,
    pub report_summary: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EmbeddingRow {
    example_id: usize,
    truth: usize,
    y_prime: usize,
    partition: String,
    f_flag: u8,
    embedding: Vec<f64>,
}

fn parse_embeddings_tsv(path: &Path) -> Result<Vec<EmbeddingRow>> {
    let mut rows = Vec::new();
    for (line_no, line) in fs::read_to_string(path)?.lines().enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 6 {
            return Err(CeclError::Input(format!(
                "{}:{line_no}: embedding row too short",
                path.display()
            )));
        }
        let bad = |what: &str| CeclError::Input(format!("{}:{line_no}: bad {what}", path.display()));
        rows.push(EmbeddingRow {
            example_id: fields[0].parse().map_err(|_| bad("example id"))?,
            truth: fields[1].parse().map_err(|_| bad("truth"))?,
            y_prime: fields[2].parse().map_err(|_| bad("coarse label"))?,
            partition: fields[3].to_string(),
            f_flag: fields[4].parse().map_err(|_| bad("f flag"))?,
            embedding: fields[5..]
                .iter()
                .map(|f| f.parse().map_err(|_| bad("embedding value")))
                .collect::<Result<Vec<f64>>>()?,
        });
    }
    Ok(rows)
}

pub fn parse_epoch_logs(path: &Path) -> Result<Vec<EpochLog>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str::<EpochLog>(l)?))
        .collect()
}

/// Render all reports for a finished run. Errors list every missing
/// prerequisite at once.
pub fn emit_reports(run_dir: &Path) -> Result<ReportFiles> {
    let paths = RunPaths::new(run_dir);
    let required = [
        &paths.epochs,
        &paths.transition_matrix,
        &paths.embeddings,
        &paths.summary,
    ];
    let missing: Vec<String> = required
        .iter()
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CeclError::MissingArtifacts(missing));
    }

    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(&paths.summary)?)?;
    let logs = parse_epoch_logs(&paths.epochs)?;

    // Accuracy curve: write the CSV, then plot from a re-read of that CSV so
    // plotted points provably equal the CSV contents.
    let acc_csv_path = run_dir.join("accuracy_curve.csv");
    let mut acc_csv = String::from("epoch,test_acc,l_cls,l_cont,l_total\n");
    for l in &logs {
        acc_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            l.epoch, l.test_acc, l.l_cls, l.l_cont, l.l_total
        ));
    }
    fs::write(&acc_csv_path, &acc_csv)?;
    let mut acc_points = Vec::new();
    let mut loss_points = Vec::new();
    for line in fs::read_to_string(&acc_csv_path)?.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CeclError::Input("accuracy_curve.csv shape changed underfoot".into()));
        }
        let epoch: f64 = fields[0].parse().map_err(|_| CeclError::Input("bad epoch".into()))?;
        let acc: f64 = fields[1].parse().map_err(|_| CeclError::Input("bad acc".into()))?;
        let total: f64 = fields[4].parse().map_err(|_| CeclError::Input("bad loss".into()))?;
        acc_points.push((epoch, acc));
        loss_points.push((epoch, total));
    }
    let acc_svg_path = run_dir.join("accuracy_curve.svg");
    fs::write(
        &acc_svg_path,
        plot::line_chart(
            "test accuracy and total loss per epoch",
            "epoch",
            "value",
            &[
                ("test_acc".to_string(), acc_points),
                ("l_total".to_string(), loss_points),
            ],
        ),
    )?;

    // Transition heatmap from the persisted CSV.
    let matrix = TransitionMatrix::from_csv(&fs::read_to_string(&paths.transition_matrix)?)?;
    let matrix_svg_path = run_dir.join("transition_matrix.svg");
    let row_labels: Vec<String> = matrix
        .source_classes
        .iter()
        .map(|c| format!("open {c}"))
        .collect();
    let col_labels: Vec<String> = (0..matrix.known_class_count)
        .map(|c| format!("k{c}"))
        .collect();
    fs::write(
        &matrix_svg_path,
        plot::heatmap(
            "open-set pseudo-label distribution over known classes",
            &row_labels,
            &col_labels,
            &matrix.rows,
        ),
    )?;

    // Embedding scatter via PCA of the persisted embeddings.
    let rows = parse_embeddings_tsv(&paths.embeddings)?;
    let embeddings: Vec<Vec<f64>> = rows.iter().map(|r| r.embedding.clone()).collect();
    let (coords, _) = pca_2d(&embeddings);
    let scatter_csv_path = run_dir.join("embedding_scatter.csv");
    let mut scatter_csv = String::from("example_id,truth,y_prime,partition,f_flag,pc1,pc2\n");
    for (r, c) in rows.iter().zip(&coords) {
        scatter_csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.example_id, r.truth, r.y_prime, r.partition, r.f_flag, c[0], c[1]
        ));
    }
    fs::write(&scatter_csv_path, &scatter_csv)?;
    let classes: Vec<usize> = rows.iter().map(|r| r.truth).collect();
    let open_set: Vec<bool> = rows
        .iter()
        .map(|r| r.truth == summary.known_class_count)
        .collect();
    let scatter_svg_path = run_dir.join("embedding_scatter.svg");
    fs::write(
        &scatter_svg_path,
        plot::scatter(
            "final train embeddings (PCA), open-set examples outlined",
            &coords,
            &classes,
            &open_set,
        ),
    )?;

    let files = ReportFiles {
        accuracy_curve_csv: acc_csv_path,
        accuracy_curve_svg: acc_svg_path,
        transition_matrix_csv: paths.transition_matrix.clone(),
        transition_matrix_svg: matrix_svg_path,
        embedding_scatter_csv: scatter_csv_path,
        embedding_scatter_svg: scatter_svg_path,
        report_summary: run_dir.join("report_summary.json"),
    };
    #[derive(Serialize)]
    struct ReportSummary<'a> {
        summary: &'a RunSummary,
        files: &'a ReportFiles,
    }
    fs::write(
        &files.report_summary,
        serde_json::to_string_pretty(&ReportSummary {
            summary: &summary,
            files: &files,
        })?,
    )?;
    Ok(files)
}
