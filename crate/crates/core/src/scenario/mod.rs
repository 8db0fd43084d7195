//! Materialize the four open-environment challenges as concrete derived
//! datasets, with export support.
//!
//! Scenario generation is a pure function of (input dataset, spec, seed);
//! independent runs, levels, and seeds can be generated concurrently.

mod cdd;
mod enc;
mod export;
mod feature_shift;

pub use cdd::cdd_prepare;
pub use enc::enc_generate;
pub use export::{export_scenario, Scenario, ScenarioManifest};
pub use feature_shift::{align_features, decremental_shift, incremental_shift};

use crate::data::Dataset;

/// One leave-one-class-out run: the held-out class is absent from training
/// and appears in the detection test set as the novel class, matched by an
/// equal number of known-class rows drawn from a holdout never used for
/// training.
#[derive(Debug, Clone)]
pub struct EncRun {
    pub held_out_class: u32,
    pub train: Dataset,
    /// Targets keep the original class coding of the parent dataset.
    pub detection_test: Dataset,
    /// True iff the row's original class is the held-out class; aligned
    /// 1:1 with `detection_test` rows.
    pub novelty: Vec<bool>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMode {
    Decremental,
    Incremental,
}

/// Record of one feature-shift materialization.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureShiftSpec {
    /// Fraction of feature columns shifted; `ceil(level * m)` columns in
    /// decremental mode.
    pub level: f64,
    /// Shifted feature names, in schema order.
    pub removed: Vec<String>,
    pub mode: ShiftMode,
    /// Number of synthetic columns appended (incremental mode only).
    pub n_new: usize,
    pub seed: u64,
}

/// A changing-data-distributions scenario: three parts sharing one feature
/// schema, with the OOD part coming from a distinct domain.
#[derive(Debug, Clone)]
pub struct CddScenario {
    pub train: Dataset,
    pub id_test: Dataset,
    pub ood_test: Dataset,
    pub provenance: String,
}

/// Stable per-run seed derivation (splitmix64 finalizer).
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
