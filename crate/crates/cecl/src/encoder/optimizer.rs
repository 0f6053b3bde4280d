//! SGD with momentum and a cosine-annealed learning rate.

use serde::{Deserialize, Serialize};

use super::{Mlp, MlpGrads};
use crate::{CeclError, Result};

/// Heavy-ball SGD over a flat parameter view of an [`Mlp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdMomentum {
    momentum: f64,
    velocity: Vec<f64>,
}

impl SgdMomentum {
    pub fn new(net: &Mlp, momentum: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&momentum) {
            return Err(CeclError::Config(format!(
                "sgd momentum {momentum} must lie in [0, 1)"
            )));
        }
        Ok(SgdMomentum {
            momentum,
            velocity: vec![0.0; net.param_count()],
        })
    }

    /// v <- m v + g; p <- p - lr v. A zero learning rate still updates the
    /// velocity but leaves parameters untouched.
    pub fn step(&mut self, net: &mut Mlp, grads: &MlpGrads, lr: f64) -> Result<()> {
        let g = grads.flatten();
        if g.len() != self.velocity.len() {
            return Err(CeclError::Internal(format!(
                "gradient size {} != optimizer state size {}",
                g.len(),
                self.velocity.len()
            )));
        }
        let mut params = net.flatten_params();
        for ((v, gi), p) in self.velocity.iter_mut().zip(&g).zip(params.iter_mut()) {
            *v = self.momentum * *v + gi;
            *p -= lr * *v;
        }
        net.set_params_from_flat(&params)
    }
}

/// Cosine annealing from `base_lr` down to zero across `total` epochs.
pub fn cosine_lr(base_lr: f64, epoch: usize, total: usize) -> f64 {
    if total <= 1 {
        return base_lr;
    }
    let t = epoch.min(total - 1) as f64 / (total - 1) as f64;
    0.5 * base_lr * (1.0 + (std::f64::consts::PI * t).cos())
}
