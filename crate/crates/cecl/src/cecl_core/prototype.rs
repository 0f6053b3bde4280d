//! Unit-norm class prototypes with moving-average maintenance.

use serde::{Deserialize, Serialize};

use crate::vecmath::{dot, mean_vec, norm};
use crate::{CeclError, Result};

/// `1 - cos(a, b)`, in [0, 2]. Zero vectors have no direction and are a
/// domain error.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let na = norm(a);
    let nb = norm(b);
    if na < 1e-12 || nb < 1e-12 {
        return Err(CeclError::Domain(
            "cosine distance of a zero vector is undefined".into(),
        ));
    }
    Ok(1.0 - dot(a, b) / (na * nb))
}

/// One unit-norm centroid per known class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeBank {
    gamma: f64,
    protos: Vec<Vec<f64>>,
    /// Number of clean embeddings each prototype was initialized from.
    pub init_counts: Vec<usize>,
}

/// Initialize one prototype per class as the normalized mean of that class's
/// clean query embeddings. A class with no clean embeddings is surfaced as an
/// error, as is a class whose embeddings cancel to a near-zero mean.
pub fn init_prototypes(groups: &[Vec<Vec<f64>>], gamma: f64) -> Result<PrototypeBank> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(CeclError::Config(format!("gamma {gamma} outside [0, 1]")));
    }
    if groups.is_empty() {
        return Err(CeclError::Init("no classes to initialize prototypes for".into()));
    }
    let mut protos = Vec::with_capacity(groups.len());
    let mut init_counts = Vec::with_capacity(groups.len());
    for (class, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(CeclError::Init(format!(
                "class {class} has no clean examples to build a prototype from"
            )));
        }
        let refs: Vec<&[f64]> = group.iter().map(|v| v.as_slice()).collect();
        let mut mean = mean_vec(&refs);
        let n = norm(&mean);
        if n < 1e-9 {
            return Err(CeclError::DegeneratePrototype { class, norm: n });
        }
        for x in mean.iter_mut() {
            *x /= n;
        }
        protos.push(mean);
        init_counts.push(group.len());
    }
    Ok(PrototypeBank {
        gamma,
        protos,
        init_counts,
    })
}

impl PrototypeBank {
    pub fn class_count(&self) -> usize {
        self.protos.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn prototype(&self, class: usize) -> &[f64] {
        &self.protos[class]
    }

    pub fn prototypes(&self) -> &[Vec<f64>] {
        &self.protos
    }

    /// Moving-average update of class `y_prime` only:
    /// `Q <- Normalize(gamma * Q + (1 - gamma) * q)`.
    pub fn update(&mut self, q: &[f64], y_prime: usize) -> Result<()> {
        if y_prime >= self.protos.len() {
            return Err(CeclError::Input(format!(
                "prototype update for class {y_prime}, bank has {}",
                self.protos.len()
            )));
        }
        let nq = norm(q);
        if (nq - 1.0).abs() > 1e-6 {
            return Err(CeclError::Internal(format!(
                "prototype update with non-unit embedding (norm {nq})"
            )));
        }
        // gamma = 1 keeps the prototype, gamma = 0 replaces it; both are exact
        // rather than routed through a re-normalization of an already-unit
        // vector.
        if self.gamma == 1.0 {
            return Ok(());
        }
        if self.gamma == 0.0 {
            self.protos[y_prime] = q.to_vec();
            return Ok(());
        }
        let proto = &mut self.protos[y_prime];
        let mut blended: Vec<f64> = proto
            .iter()
            .zip(q)
            .map(|(&p, &x)| self.gamma * p + (1.0 - self.gamma) * x)
            .collect();
        let n = norm(&blended);
        if n < 1e-12 {
            return Err(CeclError::DegeneratePrototype {
                class: y_prime,
                norm: n,
            });
        }
        for x in blended.iter_mut() {
            *x /= n;
        }
        *proto = blended;
        Ok(())
    }
}
