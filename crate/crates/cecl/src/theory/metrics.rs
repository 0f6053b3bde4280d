//! Alignment and uniformity of an embedding set under a class structure.
//!
//! Alignment is the mean squared distance between same-class (positive)
//! pairs; uniformity is the negative mean squared distance between
//! cross-class pairs. Small sets are enumerated exactly; larger ones are
//! estimated from a fixed-seed sample of pairs.

use crate::rng::Rng;
use crate::vecmath::squared_distance;
use crate::{CeclError, Result};

/// Above this many embeddings, pair expectations switch to sampling.
const ENUMERATION_LIMIT: usize = 64;
const SAMPLED_PAIRS: usize = 10_000;
const PAIR_SAMPLE_SEED: u64 = 0x7a11;

fn check_inputs(embeddings: &[Vec<f64>], class_of: &[usize]) -> Result<()> {
    if embeddings.len() != class_of.len() {
        return Err(CeclError::Input(format!(
            "{} embeddings vs {} class tags",
            embeddings.len(),
            class_of.len()
        )));
    }
    Ok(())
}

fn pair_mean(
    embeddings: &[Vec<f64>],
    class_of: &[usize],
    same_class: bool,
) -> Result<Option<f64>> {
    let n = embeddings.len();
    let mut exists = false;
    'outer: for i in 0..n {
        for j in (i + 1)..n {
            if (class_of[i] == class_of[j]) == same_class {
                exists = true;
                break 'outer;
            }
        }
    }
    if !exists {
        return Ok(None);
    }

    if n <= ENUMERATION_LIMIT {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                if (class_of[i] == class_of[j]) == same_class {
                    sum += squared_distance(&embeddings[i], &embeddings[j]);
                    count += 1;
                }
            }
        }
        return Ok(Some(sum / count as f64));
    }

    // Rejection-sample uniformly over qualifying unordered pairs.
    let mut rng = Rng::new(PAIR_SAMPLE_SEED);
    let mut sum = 0.0;
    let mut accepted = 0usize;
    let mut attempts = 0u64;
    while accepted < SAMPLED_PAIRS {
        attempts += 1;
        if attempts > 10_000_000 {
            return Err(CeclError::Internal(
                "pair sampling failed to find qualifying pairs".into(),
            ));
        }
        let i = rng.below(n);
        let j = rng.below(n);
        if i == j || (class_of[i] == class_of[j]) != same_class {
            continue;
        }
        sum += squared_distance(&embeddings[i], &embeddings[j]);
        accepted += 1;
    }
    Ok(Some(sum / accepted as f64))
}

/// Mean squared distance between positive (same-class) pairs. Always >= 0.
pub fn alignment_loss(embeddings: &[Vec<f64>], class_of: &[usize]) -> Result<f64> {
    check_inputs(embeddings, class_of)?;
    pair_mean(embeddings, class_of, true)?.ok_or_else(|| {
        CeclError::Input("alignment is undefined without a positive pair".into())
    })
}

/// Negative mean squared distance between cross-class pairs. Always <= 0.
pub fn uniformity_loss(embeddings: &[Vec<f64>], class_of: &[usize]) -> Result<f64> {
    check_inputs(embeddings, class_of)?;
    let mean = pair_mean(embeddings, class_of, false)?.ok_or_else(|| {
        CeclError::Input("uniformity is undefined without a cross-class pair".into())
    })?;
    Ok(-mean)
}

/// Unnormalized uniformity: the sum of `-|e_i - e_j|^2` over all cross-class
/// pairs. Every added cross-class pair contributes a non-positive term, so
/// extending the pair set can only lower this sum (and so raise the
/// `-uniformity` separation bound).
pub fn uniformity_pair_sum(embeddings: &[Vec<f64>], class_of: &[usize]) -> Result<f64> {
    check_inputs(embeddings, class_of)?;
    let n = embeddings.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if class_of[i] != class_of[j] {
                sum -= squared_distance(&embeddings[i], &embeddings[j]);
            }
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecmath::normalize;

    #[test]
    fn identical_embeddings_have_zero_alignment() {
        let e = vec![vec![1.0, 0.0]; 4];
        let c = vec![0, 0, 1, 1];
        assert_eq!(alignment_loss(&e, &c).unwrap(), 0.0);
        assert_eq!(uniformity_loss(&e, &c).unwrap(), 0.0);
    }

    #[test]
    fn single_pair_alignment_is_squared_distance() {
        let e = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        let c = vec![0, 0];
        assert!((alignment_loss(&e, &c).unwrap() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn single_negative_pair_uniformity() {
        let e = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        let c = vec![0, 1];
        assert!((uniformity_loss(&e, &c).unwrap() + 25.0).abs() < 1e-12);
    }

    #[test]
    fn no_positive_pair_is_an_error() {
        let e = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let c = vec![0, 1];
        assert!(alignment_loss(&e, &c).is_err());
    }

    #[test]
    fn random_instance_matches_brute_force() {
        let mut rng = Rng::new(77);
        let n = 10;
        let mut e = Vec::new();
        let mut c = Vec::new();
        for i in 0..n {
            let mut v = rng.normal_vec(4);
            normalize(&mut v).unwrap();
            e.push(v);
            c.push(i % 3);
        }
        let mut pos_sum = 0.0;
        let mut pos_n = 0;
        let mut neg_sum = 0.0;
        let mut neg_n = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d2 = squared_distance(&e[i], &e[j]);
                if c[i] == c[j] {
                    pos_sum += d2;
                    pos_n += 1;
                } else {
                    neg_sum += d2;
                    neg_n += 1;
                }
            }
        }
        assert!((alignment_loss(&e, &c).unwrap() - pos_sum / pos_n as f64).abs() < 1e-12);
        assert!((uniformity_loss(&e, &c).unwrap() + neg_sum / neg_n as f64).abs() < 1e-12);
    }

    #[test]
    fn signs_hold_on_random_instances() {
        let mut rng = Rng::new(5);
        for _ in 0..20 {
            let n = 6 + rng.below(10);
            let mut e = Vec::new();
            let mut c = Vec::new();
            for i in 0..n {
                e.push(rng.normal_vec(3));
                c.push(i % 2);
            }
            assert!(alignment_loss(&e, &c).unwrap() >= 0.0);
            assert!(uniformity_loss(&e, &c).unwrap() <= 0.0);
        }
    }

    #[test]
    fn adding_cross_class_pair_weakly_decreases_pair_sum() {
        let mut rng = Rng::new(9);
        for _ in 0..20 {
            let mut e = Vec::new();
            let mut c = Vec::new();
            for i in 0..8 {
                e.push(rng.normal_vec(3));
                c.push(i % 2);
            }
            let before = uniformity_pair_sum(&e, &c).unwrap();
            // One more embedding in a fresh class adds only cross-class pairs.
            e.push(rng.normal_vec(3));
            c.push(2);
            let after = uniformity_pair_sum(&e, &c).unwrap();
            assert!(after <= before + 1e-12);
        }
    }

    #[test]
    fn sampled_estimate_tracks_enumeration() {
        // 80 points forces the sampled path; compare against exact mean.
        let mut rng = Rng::new(123);
        let n = 80;
        let mut e = Vec::new();
        let mut c = Vec::new();
        for i in 0..n {
            e.push(rng.normal_vec(3));
            c.push(i % 4);
        }
        let sampled = uniformity_loss(&e, &c).unwrap();
        let mut sum = 0.0;
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if c[i] != c[j] {
                    sum += squared_distance(&e[i], &e[j]);
                    count += 1;
                }
            }
        }
        let exact = -sum / count as f64;
        assert!(
            (sampled - exact).abs() < 0.2,
            "sampled {sampled} vs exact {exact}"
        );
    }
}
