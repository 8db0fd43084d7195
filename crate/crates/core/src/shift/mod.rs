//! Distribution-shift statistics: covariate shift via the optimal-transport
//! dataset distance under a Gaussian approximation, concept shift via the
//! Frechet dataset distance on classifier activations, label shift as the
//! squared distance between class priors, and the decomposition of a
//! model's source-to-target loss gap into covariate and concept terms.
//!
//! All kernels are pure functions with fixed reduction order, so results
//! are deterministic given inputs and configuration.

mod disde;
mod gaussian;
mod otdd;
mod profile;
mod sinkhorn;

pub use disde::{disde, DisdeConfig, DisdeReport};
pub use gaussian::{fdd, gaussian_summary, gaussian_w2, spd_sqrt, GaussianSummary};
pub use otdd::otdd;
pub use profile::{label_shift, shift_profile, ShiftProfile, ShiftProfileInputs};
pub use sinkhorn::{sinkhorn, SinkhornResult, MARGINAL_TOLERANCE};

/// Solver knobs for the entropic optimal-transport problems.
#[derive(Debug, Clone)]
pub struct OtddConfig {
    /// Absolute entropic regularization; `None` resolves to
    /// 0.05 x median ground cost.
    pub entropic_epsilon: Option<f64>,
    pub max_iterations: usize,
    /// Per-side stratified subsample cap before building the ground cost.
    pub subsample_cap: usize,
    pub seed: u64,
}

impl Default for OtddConfig {
    fn default() -> Self {
        OtddConfig {
            entropic_epsilon: None,
            max_iterations: 200_000,
            subsample_cap: 1000,
            seed: 0,
        }
    }
}
