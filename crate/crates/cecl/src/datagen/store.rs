//! Dataset directory format.
//!
//! A dataset directory holds three files:
//!
//! - `meta.json`: dimension, known class count, noise spec, class split, and
//!   the known-label remap table.
//! - `train.tsv`: one row per training example, `id<TAB>given<TAB>truth`
//!   followed by the feature values. `truth == known_class_count` is the
//!   open-set sentinel.
//! - `test.tsv`: one row per test example, `label` followed by features.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces the dataset bit-for-bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetProvenance, NoisyDataset, NoisyExample, TestExample};
use crate::{CeclError, Result};

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct DatasetMeta {
    version: u32,
    dim: usize,
    known_class_count: usize,
    train_count: usize,
    test_count: usize,
    provenance: DatasetProvenance,
}

pub fn save_dataset(dataset: &NoisyDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = DatasetMeta {
        version: FORMAT_VERSION,
        dim: dataset.dim,
        known_class_count: dataset.known_class_count,
        train_count: dataset.examples.len(),
        test_count: dataset.test.len(),
        provenance: dataset.provenance.clone(),
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;

    let mut train = String::new();
    for e in &dataset.examples {
        train.push_str(&format!("{}\t{}\t{}", e.id, e.given, e.truth));
        for x in &e.feature {
            train.push_str(&format!("\t{x}"));
        }
        train.push('\n');
    }
    fs::write(dir.join("train.tsv"), train)?;

    let mut test = String::new();
    for e in &dataset.test {
        test.push_str(&format!("{}", e.label));
        for x in &e.feature {
            test.push_str(&format!("\t{x}"));
        }
        test.push('\n');
    }
    fs::write(dir.join("test.tsv"), test)?;
    Ok(())
}

fn parse_floats(fields: &[&str], path: &Path, line_no: usize) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| {
                CeclError::Input(format!(
                    "{}:{line_no}: bad float value {f:?}",
                    path.display()
                ))
            })
        })
        .collect()
}

fn parse_usize(field: &str, path: &Path, line_no: usize) -> Result<usize> {
    field.parse::<usize>().map_err(|_| {
        CeclError::Input(format!(
            "{}:{line_no}: bad integer value {field:?}",
            path.display()
        ))
    })
}

pub fn load_dataset(dir: &Path) -> Result<NoisyDataset> {
    let meta_path = dir.join("meta.json");
    let meta: DatasetMeta = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
    if meta.version != FORMAT_VERSION {
        return Err(CeclError::Input(format!(
            "unsupported dataset format version {} in {}",
            meta.version,
            meta_path.display()
        )));
    }

    let train_path = dir.join("train.tsv");
    let mut examples = Vec::with_capacity(meta.train_count);
    for (line_no, line) in fs::read_to_string(&train_path)?.lines().enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 + meta.dim {
            return Err(CeclError::Input(format!(
                "{}:{line_no}: expected {} fields, got {}",
                train_path.display(),
                3 + meta.dim,
                fields.len()
            )));
        }
        examples.push(NoisyExample {
            id: parse_usize(fields[0], &train_path, line_no)?,
            given: parse_usize(fields[1], &train_path, line_no)?,
            truth: parse_usize(fields[2], &train_path, line_no)?,
            feature: parse_floats(&fields[3..], &train_path, line_no)?,
        });
    }
    if examples.len() != meta.train_count {
        return Err(CeclError::Input(format!(
            "train.tsv has {} rows, meta.json says {}",
            examples.len(),
            meta.train_count
        )));
    }

    let test_path = dir.join("test.tsv");
    let mut test = Vec::with_capacity(meta.test_count);
    for (line_no, line) in fs::read_to_string(&test_path)?.lines().enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 1 + meta.dim {
            return Err(CeclError::Input(format!(
                "{}:{line_no}: expected {} fields, got {}",
                test_path.display(),
                1 + meta.dim,
                fields.len()
            )));
        }
        test.push(TestExample {
            label: parse_usize(fields[0], &test_path, line_no)?,
            feature: parse_floats(&fields[1..], &test_path, line_no)?,
        });
    }

    Ok(NoisyDataset {
        examples,
        known_class_count: meta.known_class_count,
        dim: meta.dim,
        test,
        provenance: meta.provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{build_open_set_noise, make_synthetic_blobs, BlobLayout, BlobSpec, NoiseKind, NoiseSpec};

    #[test]
    fn round_trip_is_bit_exact() {
        let corpus = make_synthetic_blobs(&BlobSpec {
            class_count: 5,
            train_per_class: 20,
            test_per_class: 6,
            dim: 3,
            layout: BlobLayout::Random,
            center_spread: 2.0,
            within_std: 0.7,
            overlap_pairs: vec![],
            seed: 31,
        })
        .unwrap();
        let ds = build_open_set_noise(
            &corpus,
            &NoiseSpec {
                known_class_count: 4,
                noise_kind: NoiseKind::Symmetric,
                noise_rate: 0.3,
                open_set_fraction: 0.2,
                seed: 8,
                asym_pair_map: None,
                open_set_labeling: None,
            },
        )
        .unwrap();

        let dir = std::env::temp_dir().join(format!("cecl-store-test-{}", std::process::id()));
        save_dataset(&ds, &dir).unwrap();
        let loaded = load_dataset(&dir).unwrap();
        assert_eq!(ds, loaded);
        std::fs::remove_dir_all(&dir).ok();
    }
}
