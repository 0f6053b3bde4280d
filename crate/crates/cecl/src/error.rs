//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum CeclError {
    /// Invalid configuration value or combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input to an operation (shape mismatch, bad file contents).
    #[error("input error: {0}")]
    Input(String),

    /// Input outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Prototype initialization failed for a class.
    #[error("initialization error: {0}")]
    Init(String),

    /// A class's clean embeddings average out to (near) zero, so no direction
    /// can be normalized into a prototype.
    #[error("degenerate prototype for class {class}: mean norm {norm:e}")]
    DegeneratePrototype { class: usize, norm: f64 },

    /// Violated internal invariant.
    #[error("internal error: {0}")]
    Internal(String),

    /// A pipeline stage failed; the stage name tells which one.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CeclError>,
    },

    /// Report generation found required run artifacts missing.
    #[error("missing artifacts: {0:?}")]
    MissingArtifacts(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CeclError {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        CeclError::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, CeclError>;
