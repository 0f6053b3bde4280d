//! Two-component PCA by power iteration, for embedding scatter plots.

use crate::vecmath::{dot, norm};

/// Project points onto their top two principal components. Returns the 2-D
/// coordinates and the two component directions. Deterministic: fixed
/// initialization, fixed iteration count.
pub fn pca_2d(points: &[Vec<f64>]) -> (Vec<[f64; 2]>, [Vec<f64>; 2]) {
    let n = points.len();
    if n == 0 {
        return (vec![], [vec![], vec![]]);
    }
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    // Covariance-vector product without materializing the matrix.
    let cov_mul = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for c in &centered {
            let s = dot(c, v);
            for (o, x) in out.iter_mut().zip(c) {
                *o += s * x;
            }
        }
        for o in out.iter_mut() {
            *o /= n as f64;
        }
        out
    };

    let power_iterate = |deflate: Option<&[f64]>| -> (Vec<f64>, f64) {
        // Deterministic start: a mildly sloped ramp so no coordinate is
        // special-cased out.
        let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + 0.01 * i as f64).collect();
        let nv = norm(&v);
        for x in v.iter_mut() {
            *x /= nv;
        }
        let mut eigenvalue = 0.0;
        for _ in 0..300 {
            let mut w = cov_mul(&v);
            // Project out the already-found component.
            if let Some(d) = deflate {
                let proj = dot(d, &w);
                for (wx, dx) in w.iter_mut().zip(d) {
                    *wx -= proj * dx;
                }
            }
            let nw = norm(&w);
            if nw < 1e-15 {
                return (v, 0.0);
            }
            eigenvalue = nw;
            for (vx, wx) in v.iter_mut().zip(&w) {
                *vx = wx / nw;
            }
        }
        (v, eigenvalue)
    };

    let (c1, _l1) = power_iterate(None);
    let (mut c2, _) = power_iterate(Some(&c1));
    // Orthogonalize against the first component for numerical hygiene.
    let p = dot(&c1, &c2);
    for (x2, x1) in c2.iter_mut().zip(&c1) {
        *x2 -= p * x1;
    }
    let n2 = norm(&c2);
    if n2 > 1e-12 {
        for x in c2.iter_mut() {
            *x /= n2;
        }
    } else {
        // Degenerate spread: fill with any unit vector orthogonal to c1.
        c2 = vec![0.0; dim];
        let pivot = c1
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        c2[pivot] = 1.0;
        let p = dot(&c1, &c2);
        for (x2, x1) in c2.iter_mut().zip(&c1) {
            *x2 -= p * x1;
        }
        let n2 = norm(&c2);
        if n2 > 1e-12 {
            for x in c2.iter_mut() {
                *x /= n2;
            }
        }
    }

    let coords = centered
        .iter()
        .map(|c| [dot(c, &c1), dot(c, &c2)])
        .collect();
    (coords, [c1, c2])
}
