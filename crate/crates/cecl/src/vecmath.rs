//! Small dense-vector helpers used throughout the crate.

use crate::{CeclError, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// L2-normalize in place. Errors on (near-)zero input rather than emitting a
/// garbage direction.
pub fn normalize(v: &mut [f64]) -> Result<()> {
    let n = norm(v);
    if n < 1e-12 {
        return Err(CeclError::Domain(format!(
            "cannot normalize near-zero vector (norm {n:e})"
        )));
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    Ok(())
}

pub fn normalized(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    normalize(&mut out)?;
    Ok(out)
}

/// a += scale * b
pub fn add_scaled(a: &mut [f64], b: &[f64], scale: f64) {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x += scale * y;
    }
}

/// Index of the largest entry; first one wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Elementwise mean of equal-length vectors.
pub fn mean_vec(vs: &[&[f64]]) -> Vec<f64> {
    debug_assert!(!vs.is_empty());
    let dim = vs[0].len();
    let mut out = vec![0.0; dim];
    for v in vs {
        add_scaled(&mut out, v, 1.0);
    }
    let inv = 1.0 / vs.len() as f64;
    for x in out.iter_mut() {
        *x *= inv;
    }
    out
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// log(sum(exp(x_i))) with the usual max shift.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Mean and (population) standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    (mean, var.sqrt())
}

/// Median of a non-empty slice (average of middle two for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    debug_assert!(!xs.is_empty());
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
