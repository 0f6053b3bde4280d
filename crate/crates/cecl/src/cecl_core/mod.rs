//! Step-2 machinery: prototypes, open-set decisions, positive selection,
//! losses, and the training loop.
//!
//! Clean examples and incorporated (F = 1) noisy examples drive both loss
//! terms; distinguishable open-set examples (F = 0) act purely as delimiter
//! negatives inside every anchor's pool view, pushing the known classes
//! apart without ever being pulled toward any of them.

mod loss;
mod prototype;
mod select;
mod trainer;

pub use loss::{
    classification_loss, contrastive_loss, contrastive_objective, evaluate_batch, total_loss,
    AnchorAudit, BatchAudit, BatchEval, LossBreakdown, LossWarnings, Step2Params,
};
pub use prototype::{cosine_distance, init_prototypes, PrototypeBank};
pub use select::{
    batch_f_flags, decide_pool, effective_view, open_set_decision, select_positives,
    PoolDecisions, SelectionParams,
};
pub use trainer::{
    init_train_state, test_accuracy, train_epoch, EpochMetrics, Step2Config, TrainState,
};
