//! MLP trunk with classifier and projection heads, hand-written backward.

use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::vecmath::{dot, norm, softmax};
use crate::{CeclError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    /// Width of both trunk layers.
    pub hidden_dim: usize,
    pub proj_hidden_dim: usize,
    /// Contrastive embedding dimension (output of the projection head).
    pub embed_dim: usize,
    pub class_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `out_dim x in_dim`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Linear {
    fn init(in_dim: usize, out_dim: usize, scale: f64, bias_scale: f64, rng: &mut Rng) -> Self {
        Linear {
            in_dim,
            out_dim,
            w: (0..in_dim * out_dim).map(|_| scale * rng.normal()).collect(),
            b: (0..out_dim).map(|_| bias_scale * rng.normal()).collect(),
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.b.clone();
        for (o, yo) in y.iter_mut().enumerate() {
            *yo += dot(&self.w[o * self.in_dim..(o + 1) * self.in_dim], x);
        }
        y
    }

    /// Accumulates dW, db into `grads` and returns dL/dx.
    fn backward(&self, x: &[f64], dy: &[f64], grads: &mut LinearGrads) -> Vec<f64> {
        let mut dx = vec![0.0; self.in_dim];
        for o in 0..self.out_dim {
            let g = dy[o];
            grads.b[o] += g;
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            let grow = &mut grads.w[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grow[i] += g * x[i];
                dx[i] += g * row[i];
            }
        }
        dx
    }
}

#[derive(Debug, Clone)]
pub struct LinearGrads {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl LinearGrads {
    fn zeros(layer: &Linear) -> Self {
        LinearGrads {
            w: vec![0.0; layer.w.len()],
            b: vec![0.0; layer.b.len()],
        }
    }
}

fn relu(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
}

fn relu_backward(z: &[f64], da: &[f64]) -> Vec<f64> {
    z.iter()
        .zip(da)
        .map(|(&zv, &g)| if zv > 0.0 { g } else { 0.0 })
        .collect()
}

/// Two-hidden-layer trunk shared by a classifier head and a projection head.
///
/// Inputs pass through a fixed (non-learned) per-feature standardization.
/// Together with bias magnitudes comparable to the standardized activations,
/// this breaks the positive homogeneity of a plain ReLU stack: without it,
/// the normalized embedding of `lambda * x` is almost exactly that of `x`,
/// and cosine distances cannot see how far an input sits from the data
/// cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub cfg: MlpConfig,
    input_mean: Vec<f64>,
    input_std: Vec<f64>,
    trunk1: Linear,
    trunk2: Linear,
    classifier: Linear,
    proj1: Linear,
    proj2: Linear,
}

/// Per-example forward pass with everything backward needs.
#[derive(Debug, Clone)]
pub struct Forward {
    /// Unit-norm contrastive embedding.
    pub q: Vec<f64>,
    pub logits: Vec<f64>,
    // caches
    z1: Vec<f64>,
    a1: Vec<f64>,
    z2: Vec<f64>,
    a2: Vec<f64>,
    zp: Vec<f64>,
    ap: Vec<f64>,
    /// Norm of the pre-normalization projection output.
    p_norm: f64,
}

impl Mlp {
    pub fn new(cfg: MlpConfig, seed: u64) -> Self {
        let root = Rng::new(seed);
        let he = |d: usize| (2.0 / d as f64).sqrt();
        let mut r1 = root.fork("trunk1");
        let mut r2 = root.fork("trunk2");
        let mut rc = root.fork("classifier");
        let mut rp1 = root.fork("proj1");
        let mut rp2 = root.fork("proj2");
        // Hidden biases at the scale of unit-variance activations; output
        // heads start near zero.
        Mlp {
            cfg,
            input_mean: vec![0.0; cfg.input_dim],
            input_std: vec![1.0; cfg.input_dim],
            trunk1: Linear::init(cfg.input_dim, cfg.hidden_dim, he(cfg.input_dim), 1.0, &mut r1),
            trunk2: Linear::init(cfg.hidden_dim, cfg.hidden_dim, he(cfg.hidden_dim), 1.0, &mut r2),
            classifier: Linear::init(
                cfg.hidden_dim,
                cfg.class_count,
                (1.0 / cfg.hidden_dim as f64).sqrt(),
                0.01,
                &mut rc,
            ),
            proj1: Linear::init(
                cfg.hidden_dim,
                cfg.proj_hidden_dim,
                he(cfg.hidden_dim),
                1.0,
                &mut rp1,
            ),
            proj2: Linear::init(
                cfg.proj_hidden_dim,
                cfg.embed_dim,
                (1.0 / cfg.proj_hidden_dim as f64).sqrt(),
                0.01,
                &mut rp2,
            ),
        }
    }

    /// Install per-feature standardization constants, usually the training
    /// set's mean and deviation. Zero deviations fall back to 1.
    pub fn set_input_standardization(&mut self, mean: Vec<f64>, std: Vec<f64>) -> Result<()> {
        if mean.len() != self.cfg.input_dim || std.len() != self.cfg.input_dim {
            return Err(CeclError::Input(format!(
                "standardization dims {}/{} != input dim {}",
                mean.len(),
                std.len(),
                self.cfg.input_dim
            )));
        }
        self.input_mean = mean;
        self.input_std = std.into_iter().map(|s| if s > 1e-12 { s } else { 1.0 }).collect();
        Ok(())
    }

    /// Fit standardization constants from a feature sample.
    pub fn standardize_from<'a>(
        &mut self,
        features: impl Iterator<Item = &'a [f64]> + Clone,
    ) -> Result<()> {
        let dim = self.cfg.input_dim;
        let mut mean = vec![0.0; dim];
        let mut count = 0usize;
        for f in features.clone() {
            for (m, x) in mean.iter_mut().zip(f) {
                *m += x;
            }
            count += 1;
        }
        if count == 0 {
            return Err(CeclError::Input("no features to standardize from".into()));
        }
        for m in mean.iter_mut() {
            *m /= count as f64;
        }
        let mut var = vec![0.0; dim];
        for f in features {
            for ((v, x), m) in var.iter_mut().zip(f).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| (v / count as f64).sqrt())
            .collect();
        self.set_input_standardization(mean, std)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.cfg.input_dim {
            return Err(CeclError::Input(format!(
                "input dim {} != configured {}",
                x.len(),
                self.cfg.input_dim
            )));
        }
        Ok(())
    }

    fn standardized(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.input_mean)
            .zip(&self.input_std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        self.check_input(x)?;
        let x = self.standardized(x);
        let z1 = self.trunk1.forward(&x);
        let a1 = relu(&z1);
        let z2 = self.trunk2.forward(&a1);
        let a2 = relu(&z2);
        let logits = self.classifier.forward(&a2);
        // The projection head reads the pre-activation trunk output: signed,
        // roughly centered features keep fresh embeddings spread over the
        // sphere instead of bunched in the positive orthant.
        let zp = self.proj1.forward(&z2);
        let ap = relu(&zp);
        let p = self.proj2.forward(&ap);
        let p_norm = norm(&p);
        if p_norm < 1e-12 {
            return Err(CeclError::Internal(
                "projection head produced a near-zero embedding".into(),
            ));
        }
        let q = p.iter().map(|&v| v / p_norm).collect();
        Ok(Forward {
            q,
            logits,
            z1,
            a1,
            z2,
            a2,
            zp,
            ap,
            p_norm,
        })
    }

    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.q)
    }

    /// Smallest |pre-activation| over all ReLU layers for this input.
    /// Finite-difference gradient checks use this to stay away from the
    /// kinks, where a two-sided difference straddles two slopes.
    pub fn preactivation_margin(&self, x: &[f64]) -> Result<f64> {
        let fwd = self.forward(x)?;
        let margin = fwd
            .z1
            .iter()
            .chain(&fwd.z2)
            .chain(&fwd.zp)
            .fold(f64::INFINITY, |m, &z| m.min(z.abs()));
        Ok(margin)
    }

    /// Norm of the projection output before L2 normalization. Gradient
    /// checks avoid inputs where this is small: the normalization's
    /// curvature scales with its inverse and degrades finite differences.
    pub fn embedding_prenorm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.p_norm)
    }

    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.forward(x)?.logits))
    }

    /// Accumulate parameter gradients for one example given upstream
    /// gradients on the normalized embedding and on the logits. `x` is the
    /// same (raw) input that produced `fwd`.
    pub fn backward(
        &self,
        x: &[f64],
        fwd: &Forward,
        d_q: &[f64],
        d_logits: &[f64],
        grads: &mut MlpGrads,
    ) {
        let x = self.standardized(x);
        // Through L2 normalization: q = p / |p|.
        let qd = dot(&fwd.q, d_q);
        let dp: Vec<f64> = fwd
            .q
            .iter()
            .zip(d_q)
            .map(|(&qi, &gi)| (gi - qi * qd) / fwd.p_norm)
            .collect();

        let dap = self.proj2.backward(&fwd.ap, &dp, &mut grads.proj2);
        let dzp = relu_backward(&fwd.zp, &dap);
        let dz2_proj = self.proj1.backward(&fwd.z2, &dzp, &mut grads.proj1);
        let da2_cls = self.classifier.backward(&fwd.a2, d_logits, &mut grads.classifier);

        let mut dz2 = relu_backward(&fwd.z2, &da2_cls);
        for (g, p) in dz2.iter_mut().zip(&dz2_proj) {
            *g += p;
        }
        let da1 = self.trunk2.backward(&fwd.a1, &dz2, &mut grads.trunk2);
        let dz1 = relu_backward(&fwd.z1, &da1);
        let _ = self.trunk1.backward(&x, &dz1, &mut grads.trunk1);
    }

    /// EMA toward the query parameters: every key parameter becomes
    /// `m * key + (1 - m) * query`.
    pub fn momentum_update(&mut self, query: &Mlp, m: f64) -> Result<()> {
        if !(0.0..1.0).contains(&m) {
            return Err(CeclError::Config(format!(
                "momentum {m} must lie in [0, 1)"
            )));
        }
        if self.cfg != query.cfg {
            return Err(CeclError::Internal(
                "momentum update across mismatched network shapes".into(),
            ));
        }
        let mut mine = self.flatten_params();
        let theirs = query.flatten_params();
        for (k, q) in mine.iter_mut().zip(&theirs) {
            *k = m * *k + (1.0 - m) * q;
        }
        self.set_params_from_flat(&mine)
    }

    fn layers(&self) -> [&Linear; 5] {
        [
            &self.trunk1,
            &self.trunk2,
            &self.classifier,
            &self.proj1,
            &self.proj2,
        ]
    }

    fn layers_mut(&mut self) -> [&mut Linear; 5] {
        [
            &mut self.trunk1,
            &mut self.trunk2,
            &mut self.classifier,
            &mut self.proj1,
            &mut self.proj2,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in self.layers() {
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out
    }

    pub fn set_params_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(CeclError::Internal(format!(
                "flat parameter vector has {} entries, expected {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for l in self.layers_mut() {
            let wl = l.w.len();
            l.w.copy_from_slice(&flat[offset..offset + wl]);
            offset += wl;
            let bl = l.b.len();
            l.b.copy_from_slice(&flat[offset..offset + bl]);
            offset += bl;
        }
        Ok(())
    }
}

/// Gradient accumulator with the same layout as [`Mlp`].
#[derive(Debug, Clone)]
pub struct MlpGrads {
    trunk1: LinearGrads,
    trunk2: LinearGrads,
    classifier: LinearGrads,
    proj1: LinearGrads,
    proj2: LinearGrads,
}

impl MlpGrads {
    pub fn zeros(net: &Mlp) -> Self {
        MlpGrads {
            trunk1: LinearGrads::zeros(&net.trunk1),
            trunk2: LinearGrads::zeros(&net.trunk2),
            classifier: LinearGrads::zeros(&net.classifier),
            proj1: LinearGrads::zeros(&net.proj1),
            proj2: LinearGrads::zeros(&net.proj2),
        }
    }

    /// Same ordering as [`Mlp::flatten_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in [
            &self.trunk1,
            &self.trunk2,
            &self.classifier,
            &self.proj1,
            &self.proj2,
        ] {
            out.extend_from_slice(&g.w);
            out.extend_from_slice(&g.b);
        }
        out
    }
}
