//! Class-expansion probe: where do open-set examples land?
//!
//! A classifier trained on known classes only pseudo-labels every open-set
//! example; the row-normalized distribution of those pseudo-labels per
//! open-set source class shows which unknown classes are absorbed into a
//! single known class (high row concentration) and which scatter.

use serde::{Deserialize, Serialize};

use crate::encoder::{Mlp, MlpConfig, MlpGrads, SgdMomentum};
use crate::rng::Rng;
use crate::vecmath::{argmax, softmax};
use crate::{CeclError, Result};

/// Rows are open-set source classes (original corpus ids), columns the
/// known classes in remapped order; entries are pseudo-label fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub source_classes: Vec<usize>,
    pub known_class_count: usize,
    pub rows: Vec<Vec<f64>>,
    pub row_counts: Vec<usize>,
    /// Max row entry: how concentrated each source class's absorption is.
    pub concentrations: Vec<f64>,
}

impl TransitionMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source_class,count");
        for c in 0..self.known_class_count {
            out.push_str(&format!(",known_{c}"));
        }
        out.push_str(",concentration\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("{},{}", self.source_classes[i], self.row_counts[i]));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", self.concentrations[i]));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<TransitionMatrix> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CeclError::Input("empty transition matrix csv".into()))?;
        let cols = header.split(',').count();
        if cols < 4 {
            return Err(CeclError::Input("transition matrix csv too narrow".into()));
        }
        let known = cols - 3;
        let mut m = TransitionMatrix {
            source_classes: vec![],
            known_class_count: known,
            rows: vec![],
            row_counts: vec![],
            concentrations: vec![],
        };
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(CeclError::Input(format!(
                    "transition matrix row has {} fields, expected {cols}",
                    fields.len()
                )));
            }
            m.source_classes.push(
                fields[0]
                    .parse()
                    .map_err(|_| CeclError::Input(format!("bad source class {:?}", fields[0])))?,
            );
            m.row_counts.push(
                fields[1]
                    .parse()
                    .map_err(|_| CeclError::Input(format!("bad count {:?}", fields[1])))?,
            );
            let mut row = Vec::with_capacity(known);
            for f in &fields[2..2 + known] {
                row.push(
                    f.parse()
                        .map_err(|_| CeclError::Input(format!("bad fraction {f:?}")))?,
                );
            }
            m.rows.push(row);
            m.concentrations.push(
                fields[cols - 1]
                    .parse()
                    .map_err(|_| CeclError::Input(format!("bad concentration {:?}", fields[cols - 1])))?,
            );
        }
        Ok(m)
    }
}

/// Pseudo-label a pool of open-set examples with the classifier argmax and
/// aggregate the row-normalized transition matrix.
pub fn class_expansion_probe(model: &Mlp, pool: &[(Vec<f64>, usize)]) -> Result<TransitionMatrix> {
    if pool.is_empty() {
        return Err(CeclError::Domain(
            "class-expansion probe needs a non-empty open-set pool".into(),
        ));
    }
    let c = model.cfg.class_count;
    let mut sources: Vec<usize> = pool.iter().map(|(_, s)| *s).collect();
    sources.sort_unstable();
    sources.dedup();
    let row_of = |s: usize| sources.binary_search(&s).unwrap();

    let mut counts = vec![vec![0usize; c]; sources.len()];
    for (feature, source) in pool {
        let pred = argmax(&model.posterior(feature)?);
        counts[row_of(*source)][pred] += 1;
    }
    let mut rows = Vec::with_capacity(sources.len());
    let mut row_counts = Vec::with_capacity(sources.len());
    let mut concentrations = Vec::with_capacity(sources.len());
    for row in counts {
        let total: usize = row.iter().sum();
        let fracs: Vec<f64> = row.iter().map(|&n| n as f64 / total as f64).collect();
        concentrations.push(fracs.iter().cloned().fold(0.0, f64::max));
        rows.push(fracs);
        row_counts.push(total);
    }
    Ok(TransitionMatrix {
        source_classes: sources,
        known_class_count: c,
        rows,
        row_counts,
        concentrations,
    })
}

/// Plain cross-entropy classifier training over labeled vectors; the
/// closed-set baseline used by the probe and retraining experiments.
pub fn train_classifier(
    examples: &[(Vec<f64>, usize)],
    net_cfg: MlpConfig,
    epochs: usize,
    batch_size: usize,
    lr: f64,
    sgd_momentum: f64,
    seed: u64,
    mut on_epoch: impl FnMut(usize, &Mlp) -> Result<()>,
) -> Result<Mlp> {
    if examples.is_empty() {
        return Err(CeclError::Input("no training examples".into()));
    }
    if epochs == 0 {
        return Err(CeclError::Config("classifier training needs epochs >= 1".into()));
    }
    let root = Rng::new(seed);
    let mut net = Mlp::new(net_cfg, root.fork("classifier-init").into_seed());
    net.standardize_from(examples.iter().map(|(f, _)| f.as_slice()))?;
    let mut opt = SgdMomentum::new(&net, sgd_momentum)?;
    let embed_dim = net.cfg.embed_dim;
    for epoch in 0..epochs {
        let mut order: Vec<usize> = (0..examples.len()).collect();
        root.fork("classifier-shuffle")
            .fork_u64(epoch as u64)
            .shuffle(&mut order);
        for batch in order.chunks(batch_size) {
            let mut grads = MlpGrads::zeros(&net);
            let scale = 1.0 / batch.len() as f64;
            for &idx in batch {
                let (feature, label) = &examples[idx];
                let fwd = net.forward(feature)?;
                let mut d_logits = softmax(&fwd.logits);
                d_logits[*label] -= 1.0;
                for g in d_logits.iter_mut() {
                    *g *= scale;
                }
                net.backward(feature, &fwd, &vec![0.0; embed_dim], &d_logits, &mut grads);
            }
            opt.step(&mut net, &grads, lr)?;
        }
        on_epoch(epoch, &net)?;
    }
    Ok(net)
}
