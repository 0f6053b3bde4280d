//! Two-step contrastive learning for open-set noisy labels.
//!
//! The pipeline has two steps. Step 1 identifies a trusted clean subset of a
//! noisy training set with a dual-network small-loss scheme and assigns coarse
//! labels to the rest. Step 2 trains a query/key encoder pair with a momentum
//! queue: class prototypes built from the clean subset decide, per noisy
//! example, whether it is incorporated into a known class or treated as a
//! delimiter that only ever acts as a negative. A classification term and a
//! prototype-filtered supervised contrastive term are optimized jointly.
//!
//! Crate layout follows the pipeline:
//!
//! - [`datagen`]: synthetic corpora and controlled symmetric / asymmetric /
//!   open-set label noise.
//! - [`encoder`]: the MLP encoder/classifier, momentum key network, and the
//!   key-embedding queue.
//! - [`step1`]: clean-example identification and coarse labeling.
//! - [`cecl_core`]: prototypes, positive-set selection, open-set decisions,
//!   the loss terms, and the training loop.
//! - [`theory`]: alignment/uniformity metrics and centroid-separation
//!   diagnostics.
//! - [`harness`]: experiment runner, probes, sweeps, and report emission.

pub mod cecl_core;
pub mod datagen;
pub mod encoder;
pub mod error;
pub mod harness;
pub mod rng;
pub mod step1;
pub mod theory;
pub mod vecmath;

pub use error::{CeclError, Result};
