//! Built-in reference models and ingestion of external-model prediction
//! and embedding files.
//!
//! The built-ins exist so every pipeline runs end to end without external
//! systems; evaluated models of interest participate through prediction
//! files instead. Each model fits a standardizer on its training set and
//! applies it at prediction time, so callers hand over raw datasets.

mod io;
mod knn;
mod linear;
mod loss;
mod mlp;

pub use io::{load_embeddings, load_predictions, PredictionSchema};
pub use knn::{knn_fit, knn_predict_proba, KnnModel};
pub use linear::{
    logreg_fit, logreg_fit_matrix, logreg_predict_matrix, logreg_predict_proba, LinearParams,
    LogRegConfig, LogRegModel,
};
pub use loss::{per_sample_loss, LossKind};
pub use mlp::{
    mlp_activations, mlp_fit, mlp_loss_and_gradients, mlp_predict_proba, MlpConfig, MlpModel,
    MlpParams, MlpTargetBatch,
};

/// Deterministic ordering for sample ids: numeric ids compare as numbers,
/// everything else lexicographically after them.
pub(crate) fn id_order_key(id: &str) -> (u8, u64, &str) {
    match id.parse::<u64>() {
        Ok(v) => (0, v, ""),
        Err(_) => (1, 0, id),
    }
}
